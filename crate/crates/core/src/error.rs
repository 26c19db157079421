use crate::ids::{AppId, ProcId, TaskId};
use crate::time::Time;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dependency cycle detected through task {0}")]
    CycleDetected(TaskId),
    #[error("edge {from} -> {to} references a missing task")]
    DanglingEdge { from: TaskId, to: TaskId },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: TaskId, to: TaskId },
    #[error("duplicate task id {0}")]
    DuplicateTask(TaskId),
    #[error("graph has no entry or no exit task")]
    NoEntryOrExit,
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("task {0} has no deadline")]
    NoDeadline(TaskId),
    #[error("application {0} has no deadline")]
    NoAppDeadline(AppId),
    #[error("executed amount {executed} is below the mandatory part {min_cost}")]
    BelowMandatory { executed: Time, min_cost: Time },
    #[error("invalid task {task}: {reason}")]
    InvalidTask { task: TaskId, reason: String },
    #[error("invalid distribution parameters: {0}")]
    InvalidDistributionParams(String),
    #[error("slots overlap on processor {0}")]
    OverlappingSlots(ProcId),
    #[error("slot [{start}, {end}) overlaps an existing slot on processor {processor}")]
    Overlap { processor: ProcId, start: Time, end: Time },
    #[error("task {task} cannot start at {start}: data ready at {ready}")]
    DataNotReady { task: TaskId, start: Time, ready: Time },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("policy {policy} cannot run a workload containing {found}")]
    PolicyWorkloadMismatch { policy: String, found: String },
    #[error("metric requested over an empty set of tasks")]
    EmptySet,
    #[error("sufferage needs at least two processors")]
    NeedTwoProcessors,
    #[error("no virtual machine can meet the deadline of task {0}")]
    Infeasible(TaskId),
    #[error("mandatory utilization {0} exceeds 1")]
    MandatoryOverload(f64),
    #[error("gang {gang} needs {size} processors but the platform has {available}")]
    GangTooLarge { gang: AppId, size: usize, available: usize },
    #[error("invalid platform: {0}")]
    InvalidPlatform(String),
    #[error("invalid policy {given:?}; valid policies: {valid}")]
    InvalidPolicy { given: String, valid: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trace is inconsistent with its embedded report: {0}")]
    ReportMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
