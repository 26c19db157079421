use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ids::{AppId, ProcId, TaskId};
use crate::platform::PowerModel;
use crate::time::Time;

use super::metrics::MetricsReport;

/// How an execution interval ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Outcome {
    /// The task ran to its full cost.
    Completed,
    /// The task ended with at least its mandatory part.
    Approximate,
    /// The interval was cut short and the task continues later.
    Interrupted,
    /// The task was dropped before finishing its mandatory part.
    Missed,
}

impl Outcome {
    pub fn is_final(self) -> bool {
        !matches!(self, Outcome::Interrupted)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum EventKind {
    Arrival {
        app: AppId,
        task: TaskId,
        cost: Time,
        min_cost: Time,
        deadline: Option<Time>,
    },
    DataReady {
        app: AppId,
        task: TaskId,
        processor: ProcId,
    },
    SlotStart {
        app: AppId,
        task: TaskId,
        processor: ProcId,
        frequency: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        duplicate: bool,
    },
    /// `executed` is the task's total progress when the interval ends.
    SlotFinish {
        app: AppId,
        task: TaskId,
        processor: ProcId,
        executed: Time,
        outcome: Outcome,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        duplicate: bool,
    },
    CheckpointTick {
        app: AppId,
        tasks: Vec<TaskId>,
        executed: Vec<Time>,
    },
    Failure {
        processor: Option<ProcId>,
        app: Option<AppId>,
        /// Work lost by the rollback, summed over members.
        lost_work: Time,
        /// Work lost by each member of the application, in member order.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        member_loss: Vec<Time>,
        /// Time of the checkpoint restored to.
        restored_to: Option<Time>,
        terminated: bool,
    },
    DeadlineReached {
        app: AppId,
        task: TaskId,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimEvent {
    pub time: Time,
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// First line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceHeader {
    pub policy: String,
    pub energy: String,
    pub seed: u64,
    pub processors: Vec<ProcId>,
    pub power_model: PowerModel,
    /// End of the interval energy is accounted over; the last event time
    /// when absent.
    pub energy_horizon: Option<Time>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<SimEvent>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: TraceHeader,
}

#[derive(Serialize, Deserialize)]
struct ReportLine {
    report: MetricsReport,
}

impl Trace {
    pub fn new(header: TraceHeader) -> Self {
        Trace {
            header,
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, time: Time, kind: EventKind) {
        let seq = self.events.len() as u64;
        self.events.push(SimEvent { time, seq, kind });
    }

    fn event_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialize"))
    }

    /// SHA-256 over the event lines, each terminated by a newline.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for line in self.event_lines() {
            h.update(line.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Header line, one line per event, then the report line.
    pub fn to_jsonl(&self, report: &MetricsReport) -> String {
        let mut out = String::new();
        let header = HeaderLine {
            header: self.header.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes")).unwrap();
        for line in self.event_lines() {
            writeln!(out, "{line}").unwrap();
        }
        let report = ReportLine { report: report.clone() };
        writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes")).unwrap();
        out
    }

    /// Parses a trace file, returning the trace and its embedded report.
    pub fn read_jsonl(reader: impl BufRead) -> Result<(Trace, Option<MetricsReport>)> {
        let mut lines = reader.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::ReportMismatch("empty trace".into()))??;
        let header: HeaderLine = serde_json::from_str(&first)?;
        let mut trace = Trace::new(header.header);
        let mut report = None;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if report.is_some() {
                return Err(Error::ReportMismatch("events after the report line".into()));
            }
            if line.starts_with("{\"report\"") {
                report = Some(serde_json::from_str::<ReportLine>(&line)?.report);
            } else {
                trace.events.push(serde_json::from_str(&line)?);
            }
        }
        Ok((trace, report))
    }
}
