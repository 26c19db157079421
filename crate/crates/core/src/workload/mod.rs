//! Workload model: tasks, gangs, task graphs, bags of tasks and periodic
//! real-time tasks, plus graph analytics and synthetic generators.

mod dag;
mod gen;
mod io;
mod realtime;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AppId, ProcId, TaskId};
use crate::time::Time;

pub use dag::{critical_path, task_level, validate_dag, weighted_levels, Dag};
pub use gen::{
    gen_bots, gen_dags, gen_gangs, ArrivalProcess, BotGenSpec, CostDistribution, DagGenSpec, GangGenSpec, GenSpec,
    SizeDistribution,
};
pub use io::{load_workload, parse_etc_csv, read_etc_csv};
pub use realtime::{laxity, min_amount_for_error_limit, output_error, space_time};

/// A unit of work.
///
/// `cost` and `min_cost` are work amounts (time at unit speed, full
/// frequency); `min_cost` is the mandatory part and `cost - min_cost` the
/// optional part of a monotone task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", from = "TaskRepr")]
pub struct Task {
    pub id: TaskId,
    pub arrival: Time,
    pub data_ready: Time,
    pub cost: Time,
    pub min_cost: Time,
    pub deadline: Option<Time>,
    pub input_error_limit: f64,
    pub actual_cost_factor: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TaskRepr {
    id: TaskId,
    #[serde(default)]
    arrival: Time,
    #[serde(default)]
    data_ready: Time,
    cost: Time,
    #[serde(default)]
    min_cost: Option<Time>,
    #[serde(default)]
    deadline: Option<Time>,
    #[serde(default)]
    input_error_limit: Option<f64>,
    #[serde(default)]
    actual_cost_factor: Option<f64>,
}

impl From<TaskRepr> for Task {
    fn from(r: TaskRepr) -> Self {
        Task {
            id: r.id,
            arrival: r.arrival,
            data_ready: r.data_ready,
            cost: r.cost,
            min_cost: r.min_cost.unwrap_or(r.cost),
            deadline: r.deadline,
            input_error_limit: r.input_error_limit.unwrap_or(1.0),
            actual_cost_factor: r.actual_cost_factor.unwrap_or(1.0),
        }
    }
}

impl Task {
    /// A fully mandatory task with no deadline, available at time zero.
    pub fn new(id: u32, cost: Time) -> Self {
        Task {
            id: TaskId(id),
            arrival: Time::ZERO,
            data_ready: Time::ZERO,
            cost,
            min_cost: cost,
            deadline: None,
            input_error_limit: 1.0,
            actual_cost_factor: 1.0,
        }
    }

    pub fn with_min_cost(mut self, min_cost: Time) -> Self {
        self.min_cost = min_cost;
        self
    }

    pub fn with_deadline(mut self, deadline: Time) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn with_data_ready(mut self, t: Time) -> Self {
        self.data_ready = t;
        self
    }

    pub fn with_arrival(mut self, t: Time) -> Self {
        self.arrival = t;
        self
    }

    pub fn with_input_error_limit(mut self, limit: f64) -> Self {
        self.input_error_limit = limit;
        self
    }

    pub fn with_actual_cost_factor(mut self, factor: f64) -> Self {
        self.actual_cost_factor = factor;
        self
    }

    /// Earliest time the task may start.
    pub fn release(&self) -> Time {
        self.arrival.max(self.data_ready)
    }

    pub fn optional_cost(&self) -> Time {
        self.cost - self.min_cost
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::InvalidTask {
                task: self.id,
                reason: reason.to_string(),
            })
        };
        if !self.cost.is_positive() {
            return bad("cost must be positive");
        }
        if !self.min_cost.is_positive() || self.min_cost > self.cost {
            return bad("minCost must satisfy 0 < minCost <= cost");
        }
        if self.arrival.is_negative() || self.data_ready.is_negative() {
            return bad("arrival and dataReady must be nonnegative");
        }
        if let Some(d) = self.deadline {
            if d <= self.arrival {
                return bad("deadline must be later than arrival");
            }
        }
        if !(0.0..=1.0).contains(&self.input_error_limit) {
            return bad("inputErrorLimit must lie in [0, 1]");
        }
        if !(self.actual_cost_factor > 0.0 && self.actual_cost_factor <= 1.0) {
            return bad("actualCostFactor must lie in (0, 1]");
        }
        Ok(())
    }
}

/// A set of frequently communicating tasks that start together on distinct
/// processors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Gang {
    pub id: AppId,
    #[serde(default)]
    pub arrival: Time,
    pub tasks: Vec<Task>,
    /// Optional explicit processor queue for each member, in member order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Vec<ProcId>>,
}

impl Gang {
    /// Builds a gang; member arrivals are set to the gang's arrival.
    pub fn new(id: u32, arrival: Time, tasks: Vec<Task>) -> Self {
        let mut g = Gang {
            id: AppId(id),
            arrival,
            tasks,
            placement: None,
        };
        g.normalize();
        g
    }

    pub fn with_placement(mut self, placement: Vec<ProcId>) -> Self {
        self.placement = Some(placement);
        self
    }

    pub fn size(&self) -> usize {
        self.tasks.len()
    }

    /// Earliest member deadline, if every member has one.
    pub fn deadline(&self) -> Option<Time> {
        self.tasks.iter().map(|t| t.deadline).min().flatten()
    }

    pub(crate) fn normalize(&mut self) {
        for t in &mut self.tasks {
            t.arrival = self.arrival;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() {
            return Err(Error::InvalidConfig(format!("gang {} is empty", self.id)));
        }
        for t in &self.tasks {
            t.validate()?;
            if t.arrival != self.arrival {
                return Err(Error::InvalidTask {
                    task: t.id,
                    reason: "gang members must share the gang arrival".into(),
                });
            }
        }
        if let Some(p) = &self.placement {
            let mut seen = p.clone();
            seen.sort();
            seen.dedup();
            if p.len() != self.tasks.len() || seen.len() != p.len() {
                return Err(Error::InvalidConfig(format!(
                    "gang {} placement must name one distinct processor per member",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: TaskId,
    pub to: TaskId,
    #[serde(default)]
    pub comm: Time,
}

impl Edge {
    pub fn new(from: u32, to: u32, comm: Time) -> Self {
        Edge {
            from: TaskId(from),
            to: TaskId(to),
            comm,
        }
    }
}

/// A workflow application as an unvalidated task graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DagApp {
    pub id: AppId,
    #[serde(default)]
    pub arrival: Time,
    pub nodes: Vec<Task>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub deadline: Option<Time>,
}

impl DagApp {
    pub fn new(id: u32, nodes: Vec<Task>, edges: Vec<Edge>) -> Self {
        DagApp {
            id: AppId(id),
            arrival: Time::ZERO,
            nodes,
            edges,
            deadline: None,
        }
    }

    pub fn with_deadline(mut self, deadline: Time) -> Self {
        self.deadline = Some(deadline);
        self
    }
}

/// A bag of independent tasks with an estimated-time-to-compute matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BotApp {
    pub id: AppId,
    #[serde(default)]
    pub arrival: Time,
    pub tasks: Vec<Task>,
    /// `etc[task][processor]`: execution time at full frequency.
    #[serde(default)]
    pub etc: Vec<Vec<Time>>,
    /// CSV file holding the matrix, relative to the workload file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etc_file: Option<String>,
}

impl BotApp {
    pub fn new(id: u32, tasks: Vec<Task>, etc: Vec<Vec<Time>>) -> Self {
        BotApp {
            id: AppId(id),
            arrival: Time::ZERO,
            tasks,
            etc,
            etc_file: None,
        }
    }

    /// Convenience constructor from a floating-point matrix; tasks get ids
    /// `0..rows` and cost equal to their fastest entry.
    pub fn from_matrix(id: u32, etc: &[Vec<f64>]) -> Self {
        let etc: Vec<Vec<Time>> = etc
            .iter()
            .map(|row| row.iter().map(|&v| Time::from_f64(v)).collect())
            .collect();
        let tasks = etc
            .iter()
            .enumerate()
            .map(|(i, row)| Task::new(i as u32, row.iter().copied().min().unwrap_or(Time::ZERO)))
            .collect();
        BotApp::new(id, tasks, etc)
    }

    pub fn validate(&self, processors: usize) -> Result<()> {
        if self.etc.len() != self.tasks.len() {
            return Err(Error::InvalidConfig(format!(
                "bot {}: ETC has {} rows for {} tasks",
                self.id,
                self.etc.len(),
                self.tasks.len()
            )));
        }
        for (t, row) in self.tasks.iter().zip(&self.etc) {
            t.validate()?;
            if row.len() != processors {
                return Err(Error::InvalidConfig(format!(
                    "bot {}: ETC row for {} has {} columns, platform has {} processors",
                    self.id,
                    t.id,
                    row.len(),
                    processors
                )));
            }
            if row.iter().any(|v| !v.is_positive()) {
                return Err(Error::InvalidConfig(format!(
                    "bot {}: ETC entries must be positive",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// A periodic real-time task; each release must finish before the next.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PeriodicTask {
    pub id: AppId,
    pub period: Time,
    pub mandatory_cost: Time,
    #[serde(default)]
    pub optional_cost: Time,
    /// Actual / worst-case ratio of the mandatory part.
    #[serde(default = "one")]
    pub actual_cost_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl PeriodicTask {
    pub fn new(id: u32, period: Time, mandatory: Time, optional: Time) -> Self {
        PeriodicTask {
            id: AppId(id),
            period,
            mandatory_cost: mandatory,
            optional_cost: optional,
            actual_cost_factor: 1.0,
        }
    }

    pub fn with_actual_cost_factor(mut self, f: f64) -> Self {
        self.actual_cost_factor = f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.period.is_positive()
            && self.mandatory_cost.is_positive()
            && self.mandatory_cost <= self.period
            && !self.optional_cost.is_negative()
            && self.actual_cost_factor > 0.0
            && self.actual_cost_factor <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "periodic task {} violates 0 < mandatory <= period, optional >= 0",
                self.id
            )))
        }
    }
}

/// A complete workload file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    #[serde(default)]
    pub gangs: Vec<Gang>,
    #[serde(default)]
    pub dags: Vec<DagApp>,
    #[serde(default)]
    pub bots: Vec<BotApp>,
    #[serde(default)]
    pub periodic: Vec<PeriodicTask>,
}

impl Workload {
    pub fn is_empty(&self) -> bool {
        self.gangs.is_empty() && self.dags.is_empty() && self.bots.is_empty() && self.periodic.is_empty()
    }

    /// Names of the non-empty workload classes.
    pub fn classes(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.gangs.is_empty() {
            v.push("gangs");
        }
        if !self.dags.is_empty() {
            v.push("dags");
        }
        if !self.bots.is_empty() {
            v.push("bots");
        }
        if !self.periodic.is_empty() {
            v.push("periodic");
        }
        v
    }
}
