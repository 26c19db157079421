#ifndef SCHEDARENA_H
#define SCHEDARENA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a fallible call.
typedef enum SaStatus {
  SA_STATUS_OK = 0,
  SA_STATUS_NULL_POINTER = 1,
  SA_STATUS_INVALID_UTF8 = 2,
  // Malformed platform or workload JSON.
  SA_STATUS_PARSE_ERROR = 3,
  // Unknown policy or energy policy string.
  SA_STATUS_INVALID_POLICY = 4,
  // The workload does not suit the policy.
  SA_STATUS_POLICY_MISMATCH = 5,
  // The simulation rejected its inputs.
  SA_STATUS_SIMULATION_ERROR = 6,
  // A Rust panic was caught at the boundary.
  SA_STATUS_PANIC = 7,
} SaStatus;

// Opaque platform handle.
typedef struct SaPlatform SaPlatform;

// Opaque result of one simulation.
typedef struct SaRun SaRun;

// Opaque workload handle.
typedef struct SaWorkload SaWorkload;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *sa_last_error(void);

// Parses a platform description.
//
// # Safety
// `json` must be a nul-terminated string and `out` a writable pointer.
enum SaStatus sa_platform_from_json(const char *json, struct SaPlatform **out);

// `n` identical unit-speed processors; null when `n` is zero.
struct SaPlatform *sa_platform_uniform(size_t n);

// # Safety
// `p` must be null or a handle from this library not yet freed.
void sa_platform_free(struct SaPlatform *p);

// Parses a workload description. File references inside it are ignored.
//
// # Safety
// `json` must be a nul-terminated string and `out` a writable pointer.
enum SaStatus sa_workload_from_json(const char *json, struct SaWorkload **out);

// # Safety
// `w` must be null or a handle from this library not yet freed.
void sa_workload_free(struct SaWorkload *w);

// Simulates `workload` on `platform`. `energy` may be null for no
// frequency scaling.
//
// # Safety
// Handles must be live, strings nul-terminated and `out` writable.
enum SaStatus sa_run(const struct SaPlatform *platform,
                     const struct SaWorkload *workload,
                     const char *policy,
                     const char *energy,
                     uint64_t seed,
                     struct SaRun **out);

// # Safety
// `r` must be null or a handle from this library not yet freed.
void sa_run_free(struct SaRun *r);

// Metrics report as JSON; release with [`sa_string_free`].
//
// # Safety
// `r` must be a live run handle.
char *sa_run_report_json(const struct SaRun *r);

// Hex SHA-256 of the event trace; release with [`sa_string_free`].
//
// # Safety
// `r` must be a live run handle.
char *sa_run_trace_hash(const struct SaRun *r);

// Makespan in time units, or a negative value for a null handle.
//
// # Safety
// `r` must be null or a live run handle.
double sa_run_makespan(const struct SaRun *r);

// Number of tasks in the report.
//
// # Safety
// `r` must be null or a live run handle.
size_t sa_run_task_count(const struct SaRun *r);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void sa_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHEDARENA_H */
