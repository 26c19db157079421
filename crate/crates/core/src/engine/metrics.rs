use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AppId, ProcId, TaskId};
use crate::time::{Time, TICKS_PER_UNIT};

use super::trace::{EventKind, Outcome, Trace};

/// Timing of one task as seen in a trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskRecord {
    pub app: AppId,
    pub task: TaskId,
    pub arrival: Time,
    pub start: Time,
    pub finish: Time,
    pub deadline: Option<Time>,
    pub executed: Time,
    pub cost: Time,
    pub min_cost: Time,
    pub outcome: Outcome,
}

/// Mean of tick counts in time units, computed as `sum / n / 1e6`.
fn mean_ticks(sum: i128, n: usize) -> f64 {
    sum as f64 / n as f64 / TICKS_PER_UNIT as f64
}

/// Average response time, the mean of `f - a`.
pub fn avg_response(records: &[TaskRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptySet);
    }
    let sum: i128 = records.iter().map(|r| (r.finish - r.arrival).ticks() as i128).sum();
    Ok(mean_ticks(sum, records.len()))
}

/// Latest finish minus earliest start.
pub fn makespan(records: &[TaskRecord]) -> Result<Time> {
    let first = records.iter().map(|r| r.start).min().ok_or(Error::EmptySet)?;
    let last = records.iter().map(|r| r.finish).max().ok_or(Error::EmptySet)?;
    Ok(last - first)
}

fn deadlines(records: &[TaskRecord]) -> Result<Vec<Time>> {
    if records.is_empty() {
        return Err(Error::EmptySet);
    }
    records
        .iter()
        .map(|r| r.deadline.ok_or(Error::NoDeadline(r.task)))
        .collect()
}

/// A task is guaranteed when it finished its mandatory part by its
/// deadline (`f <= d`).
fn guaranteed(r: &TaskRecord, d: Time) -> bool {
    r.outcome != Outcome::Missed && r.finish <= d
}

/// Fraction of tasks that met their deadlines.
pub fn task_guarantee_ratio(records: &[TaskRecord]) -> Result<f64> {
    let ds = deadlines(records)?;
    let met = records.iter().zip(&ds).filter(|(r, &d)| guaranteed(r, d)).count();
    Ok(met as f64 / records.len() as f64)
}

/// Mean of `max(0, f - d)`.
pub fn avg_tardiness(records: &[TaskRecord]) -> Result<f64> {
    let ds = deadlines(records)?;
    let sum: i128 = records
        .iter()
        .zip(&ds)
        .map(|(r, &d)| (r.finish - d).max(Time::ZERO).ticks() as i128)
        .sum();
    Ok(mean_ticks(sum, records.len()))
}

/// `1 - output error`: 1 for a full run, 0 for the bare mandatory part.
pub fn precision(r: &TaskRecord) -> Option<f64> {
    if r.executed < r.min_cost {
        return None;
    }
    let optional = r.cost - r.min_cost;
    if !optional.is_positive() || r.executed >= r.cost {
        return Some(1.0);
    }
    Some(1.0 - (r.cost - r.executed).ticks() as f64 / optional.ticks() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub policy: String,
    pub energy_policy: String,
    pub seed: u64,
    pub tasks: usize,
    pub avg_response: Option<f64>,
    pub makespan: Time,
    pub tgr: Option<f64>,
    pub avg_tardiness: Option<f64>,
    pub energy_joules: f64,
    pub avg_precision: Option<f64>,
    pub failures_injected: u64,
    pub rollbacks: u64,
    pub mandatory_misses: u64,
    pub trace_hash: String,
    pub per_task: Vec<TaskRecord>,
}

/// Column names of [`MetricsReport::csv_row`].
pub const CSV_HEADER: [&str; 13] = [
    "policy",
    "energyPolicy",
    "seed",
    "tasks",
    "avgResponse",
    "makespan",
    "tgr",
    "avgTardiness",
    "energyJoules",
    "avgPrecision",
    "failuresInjected",
    "rollbacks",
    "traceHash",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsReport {
    /// Reduces a raw trace to its metrics.
    pub fn from_trace(trace: &Trace) -> MetricsReport {
        #[derive(Default)]
        struct Acc {
            arrival: Time,
            deadline: Option<Time>,
            cost: Time,
            min_cost: Time,
            start: Option<Time>,
            end: Option<(Time, Time, Outcome)>,
            progress: Time,
            dropped: Option<Time>,
        }
        let pm = trace.header.power_model;
        let mut tasks: BTreeMap<(AppId, TaskId), Acc> = BTreeMap::new();
        let mut open: BTreeMap<ProcId, (Time, f64)> = BTreeMap::new();
        let mut busy_energy = 0.0;
        let mut busy_ticks: i128 = 0;
        let mut failures = 0;
        let mut rollbacks = 0;
        let mut last = Time::ZERO;
        for e in &trace.events {
            last = last.max(e.time);
            match &e.kind {
                EventKind::Arrival {
                    app,
                    task,
                    cost,
                    min_cost,
                    deadline,
                } => {
                    let a = tasks.entry((*app, *task)).or_default();
                    a.arrival = e.time;
                    a.cost = *cost;
                    a.min_cost = *min_cost;
                    a.deadline = *deadline;
                }
                EventKind::SlotStart {
                    app,
                    task,
                    processor,
                    frequency,
                    duplicate,
                } => {
                    open.insert(*processor, (e.time, *frequency));
                    if !duplicate {
                        let a = tasks.entry((*app, *task)).or_default();
                        a.start.get_or_insert(e.time);
                    }
                }
                EventKind::SlotFinish {
                    app,
                    task,
                    processor,
                    executed,
                    outcome,
                    duplicate,
                } => {
                    if let Some((s, f)) = open.remove(processor) {
                        busy_energy += pm.power(f) * (e.time - s).as_f64();
                        busy_ticks += (e.time - s).ticks() as i128;
                    }
                    if !duplicate {
                        let a = tasks.entry((*app, *task)).or_default();
                        a.progress = *executed;
                        if outcome.is_final() {
                            a.end = Some((e.time, *executed, *outcome));
                        }
                    }
                }
                EventKind::DeadlineReached { app, task } => {
                    tasks.entry((*app, *task)).or_default().dropped.get_or_insert(e.time);
                }
                EventKind::Failure { app, terminated, .. } => {
                    failures += 1;
                    if app.is_some() && !terminated {
                        rollbacks += 1;
                    }
                }
                _ => {}
            }
        }
        let horizon = trace.header.energy_horizon.unwrap_or(last);
        let total_ticks = horizon.ticks() as i128 * trace.header.processors.len() as i128;
        let idle = Time::from_ticks((total_ticks - busy_ticks).max(0) as i64);
        let energy = busy_energy + pm.static_power * idle.as_f64();

        let records: Vec<TaskRecord> = tasks
            .into_iter()
            .filter_map(|((app, task), a)| {
                let (finish, executed, outcome) =
                    a.end.or_else(|| a.dropped.map(|d| (d, a.progress, Outcome::Missed)))?;
                Some(TaskRecord {
                    app,
                    task,
                    arrival: a.arrival,
                    start: a.start.unwrap_or(finish),
                    finish,
                    deadline: a.deadline,
                    executed,
                    cost: a.cost,
                    min_cost: a.min_cost,
                    outcome,
                })
            })
            .collect();
        let precisions: Vec<f64> = records.iter().filter_map(precision).collect();
        let avg_precision = if precisions.is_empty() {
            None
        } else {
            Some(precisions.iter().sum::<f64>() / precisions.len() as f64)
        };
        MetricsReport {
            policy: trace.header.policy.clone(),
            energy_policy: trace.header.energy.clone(),
            seed: trace.header.seed,
            tasks: records.len(),
            avg_response: avg_response(&records).ok(),
            makespan: makespan(&records).unwrap_or(Time::ZERO),
            tgr: task_guarantee_ratio(&records).ok(),
            avg_tardiness: avg_tardiness(&records).ok(),
            energy_joules: energy,
            avg_precision,
            failures_injected: failures,
            rollbacks,
            mandatory_misses: records.iter().filter(|r| r.outcome == Outcome::Missed).count() as u64,
            trace_hash: trace.hash(),
            per_task: records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.policy.clone(),
            self.energy_policy.clone(),
            self.seed.to_string(),
            self.tasks.to_string(),
            opt(self.avg_response),
            self.makespan.to_string(),
            opt(self.tgr),
            opt(self.avg_tardiness),
            self.energy_joules.to_string(),
            opt(self.avg_precision),
            self.failures_injected.to_string(),
            self.rollbacks.to_string(),
            self.trace_hash.clone(),
        ]
    }

    /// Header plus one row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        w.write_record(self.csv_row()).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}
