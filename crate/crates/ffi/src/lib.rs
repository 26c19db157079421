//! C ABI for the schedarena simulator.
//!
//! Platforms, workloads and run results are opaque handles created by the
//! `*_from_json` constructors or `sa_run` and released with their
//! `sa_*_free` counterparts. Fallible functions return an [`SaStatus`]; the message of
//! the most recent failure on the calling thread is available from
//! [`sa_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use schedarena::energy::EnergyPolicy;
use schedarena::engine::{run, Policy, RunConfig, RunOutput};
use schedarena::error::Error;
use schedarena::platform::Platform;
use schedarena::workload::Workload;

/// Result of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed platform or workload JSON.
    ParseError = 3,
    /// Unknown policy or energy policy string.
    InvalidPolicy = 4,
    /// The workload does not suit the policy.
    PolicyMismatch = 5,
    /// The simulation rejected its inputs.
    SimulationError = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Opaque platform handle.
pub struct SaPlatform(Platform);

/// Opaque workload handle.
pub struct SaWorkload(Workload);

/// Opaque result of one simulation.
pub struct SaRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: SaStatus, msg: impl Into<String>) -> SaStatus {
    set_error(msg);
    status
}

fn classify(e: &Error) -> SaStatus {
    match e {
        Error::InvalidPolicy { .. } => SaStatus::InvalidPolicy,
        Error::PolicyWorkloadMismatch { .. } | Error::NoDeadline(_) | Error::NeedTwoProcessors => {
            SaStatus::PolicyMismatch
        }
        Error::Json(_) | Error::InvalidPlatform(_) => SaStatus::ParseError,
        _ => SaStatus::SimulationError,
    }
}

fn guard(f: impl FnOnce() -> SaStatus) -> SaStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(SaStatus::Panic, "panic in schedarena"))
}

/// # Safety
/// `s` must be null or point to a nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SaStatus> {
    if s.is_null() {
        return Err(fail(SaStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(SaStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a platform description.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_platform_from_json(json: *const c_char, out: *mut *mut SaPlatform) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return fail(SaStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Platform::from_json(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SaPlatform(p)));
                SaStatus::Ok
            }
            Err(e) => fail(SaStatus::ParseError, e.to_string()),
        }
    })
}

/// `n` identical unit-speed processors; null when `n` is zero.
#[no_mangle]
pub extern "C" fn sa_platform_uniform(n: usize) -> *mut SaPlatform {
    if n == 0 {
        set_error("at least one processor is required");
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(SaPlatform(Platform::uniform(n))))
}

/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sa_platform_free(p: *mut SaPlatform) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Parses a workload description. File references inside it are ignored.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sa_workload_from_json(json: *const c_char, out: *mut *mut SaWorkload) -> SaStatus {
    guard(|| {
        if out.is_null() {
            return fail(SaStatus::NullPointer, "null output pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Workload::from_json(text) {
            Ok(w) => {
                *out = Box::into_raw(Box::new(SaWorkload(w)));
                SaStatus::Ok
            }
            Err(e) => fail(SaStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `w` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sa_workload_free(w: *mut SaWorkload) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Simulates `workload` on `platform`. `energy` may be null for no
/// frequency scaling.
///
/// # Safety
/// Handles must be live, strings nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sa_run(
    platform: *const SaPlatform,
    workload: *const SaWorkload,
    policy: *const c_char,
    energy: *const c_char,
    seed: u64,
    out: *mut *mut SaRun,
) -> SaStatus {
    guard(|| {
        if platform.is_null() || workload.is_null() || out.is_null() {
            return fail(SaStatus::NullPointer, "null handle or output pointer");
        }
        let policy: Policy = match read_str(policy).map(str::parse) {
            Ok(Ok(p)) => p,
            Ok(Err(e)) => return fail(SaStatus::InvalidPolicy, e.to_string()),
            Err(s) => return s,
        };
        let energy: EnergyPolicy = if energy.is_null() {
            EnergyPolicy::None
        } else {
            match read_str(energy).map(str::parse) {
                Ok(Ok(e)) => e,
                Ok(Err(e)) => return fail(SaStatus::InvalidPolicy, e.to_string()),
                Err(s) => return s,
            }
        };
        let cfg = RunConfig {
            policy,
            energy,
            faults: None,
            seed,
        };
        match run(&(*workload).0, &(*platform).0, &cfg) {
            Ok(o) => {
                *out = Box::into_raw(Box::new(SaRun(o)));
                SaStatus::Ok
            }
            Err(e) => fail(classify(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sa_run_free(r: *mut SaRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Metrics report as JSON; release with [`sa_string_free`].
///
/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn sa_run_report_json(r: *const SaRun) -> *mut c_char {
    if r.is_null() {
        set_error("null run handle");
        return ptr::null_mut();
    }
    into_c_string((*r).0.report.to_json())
}

/// Hex SHA-256 of the event trace; release with [`sa_string_free`].
///
/// # Safety
/// `r` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn sa_run_trace_hash(r: *const SaRun) -> *mut c_char {
    if r.is_null() {
        set_error("null run handle");
        return ptr::null_mut();
    }
    into_c_string((*r).0.report.trace_hash.clone())
}

/// Makespan in time units, or a negative value for a null handle.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn sa_run_makespan(r: *const SaRun) -> f64 {
    if r.is_null() {
        return -1.0;
    }
    (*r).0.report.makespan.as_f64()
}

/// Number of tasks in the report.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn sa_run_task_count(r: *const SaRun) -> usize {
    if r.is_null() {
        return 0;
    }
    (*r).0.report.tasks
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
