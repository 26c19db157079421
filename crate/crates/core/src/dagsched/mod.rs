//! Static workflow schedulers. Each scheduler turns a validated task graph
//! into a [`DagSchedule`] on a set of processor timelines; several graphs
//! may be planned one after another onto shared timelines.

mod dsc;
mod dsh;
mod edfac;
mod list;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AppId, TaskId};
use crate::platform::{Platform, ScheduledSlot, Timeline, Timelines};
use crate::time::Time;
use crate::workload::Dag;

pub use dsc::{dominant_sequence, dsc, Clustering};
pub use dsh::{dsh, dsh_with_log, DshStep};
pub use edfac::{edf, edf_ac, edf_ac_insert, AcPlacement, AcVariant};
pub use list::{decode, heft, hlf, ish, lstf};
pub use search::{ga, sa, Chromosome, GaParams, GaState, SaParams};

/// A static schedule of one task graph. Duplicated copies carry
/// `duplicate = true`; every task has exactly one primary slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagSchedule {
    pub app: AppId,
    pub slots: Vec<ScheduledSlot>,
}

impl DagSchedule {
    pub(crate) fn new(app: AppId, mut slots: Vec<ScheduledSlot>) -> Self {
        slots.sort_by_key(|s| (s.start, s.processor, s.task, s.duplicate));
        DagSchedule { app, slots }
    }

    pub fn primary(&self, task: TaskId) -> Option<&ScheduledSlot> {
        self.slots.iter().find(|s| s.task == task && !s.duplicate)
    }

    pub fn copies(&self, task: TaskId) -> impl Iterator<Item = &ScheduledSlot> {
        self.slots.iter().filter(move |s| s.task == task)
    }

    /// Latest finish minus earliest start.
    pub fn makespan(&self) -> Time {
        let first = self.slots.iter().map(|s| s.start).min().unwrap_or(Time::ZERO);
        let last = self.slots.iter().map(|s| s.finish).max().unwrap_or(Time::ZERO);
        last - first
    }

    pub fn finish(&self) -> Time {
        self.slots.iter().map(|s| s.finish).max().unwrap_or(Time::ZERO)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    /// Gantt chart rows `task,proc,start,finish`.
    pub fn gantt_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["task", "proc", "start", "finish"])
            .expect("in-memory write");
        for s in &self.slots {
            w.write_record([
                s.task.to_string(),
                s.processor.to_string(),
                s.start.to_string(),
                s.finish.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Checks precedence (with zero communication cost between copies on the
/// same processor), release times, per-processor non-overlap, slot lengths
/// and executed amounts.
pub fn validate_schedule(dag: &Dag, platform: &Platform, sched: &DagSchedule) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidSchedule(m));
    for s in &sched.slots {
        let i = dag.idx(s.task)?;
        let t = dag.task(i);
        let Some(p) = platform.index_of(s.processor) else {
            return bad(format!("{} placed on unknown processor {}", s.task, s.processor));
        };
        if s.finish <= s.start {
            return bad(format!("{} has an empty slot", s.task));
        }
        let lo = if s.duplicate { t.cost } else { t.min_cost };
        if s.executed < lo || s.executed > t.cost {
            return bad(format!(
                "{} executes {} outside [{}, {}]",
                s.task, s.executed, lo, t.cost
            ));
        }
        let need = s.executed.div_rate(platform.processor(p).speed_factor * s.frequency);
        if s.duration() < need {
            return bad(format!("{} slot too short for its work", s.task));
        }
        if s.start < dag.release(i) {
            return bad(format!("{} starts before its release", s.task));
        }
        for &(u, comm) in dag.parents(i) {
            let pid = dag.task(u).id;
            let ok = sched
                .copies(pid)
                .any(|c| c.finish + if c.processor == s.processor { Time::ZERO } else { comm } <= s.start);
            if !ok {
                return bad(format!("{} starts before data from {} arrives", s.task, pid));
            }
        }
    }
    for i in 0..dag.len() {
        let n = sched
            .slots
            .iter()
            .filter(|s| s.task == dag.task(i).id && !s.duplicate)
            .count();
        if n != 1 {
            return bad(format!("{} has {} primary slots", dag.task(i).id, n));
        }
    }
    let mut by_proc = sched.slots.clone();
    by_proc.sort_by_key(|s| (s.processor, s.start));
    for w in by_proc.windows(2) {
        if w[0].processor == w[1].processor && w[1].start < w[0].finish {
            return bad(format!(
                "slots of {} and {} overlap on {}",
                w[0].task, w[1].task, w[0].processor
            ));
        }
    }
    Ok(())
}

/// Workflow scheduling policy.
#[derive(Clone, Debug, PartialEq)]
pub enum DagPolicy {
    Hlf,
    Ish,
    Heft,
    Dsc,
    Dsh,
    Sa(SaParams),
    Ga(GaParams),
    Lstf,
    Edf,
    EdfAc(AcVariant),
}

pub const DAG_POLICIES: &str =
    "hlf | ish | heft | dsc | dsh | sa[:T0,cool,iters] | ga[:pop,gens,cx,mut] | lstf | edf | edf-ac:ff|bf|wf";

impl DagPolicy {
    /// Plans `dag` onto `timelines`, after whatever they already hold.
    pub fn plan(&self, dag: &Dag, timelines: &mut Timelines, seed: u64) -> Result<DagSchedule> {
        let tl: &mut Vec<Timeline> = &mut timelines.0;
        match self {
            DagPolicy::Hlf => Ok(list::hlf_on(dag, tl)),
            DagPolicy::Ish => Ok(list::ish_on(dag, tl)),
            DagPolicy::Heft => Ok(list::heft_on(dag, tl)),
            DagPolicy::Lstf => list::lstf_on(dag, tl),
            DagPolicy::Dsc => Ok(dsc::dsc_on(dag, tl).1),
            DagPolicy::Dsh => Ok(dsh::dsh_on(dag, tl).0),
            DagPolicy::Sa(p) => Ok(search::sa_on(dag, tl, &SaParams { seed, ..p.clone() })),
            DagPolicy::Ga(p) => Ok(search::ga_on(dag, tl, &GaParams { seed, ..p.clone() })),
            DagPolicy::Edf => edfac::edf_on(dag, tl),
            DagPolicy::EdfAc(v) => edfac::edf_ac_on(dag, tl, *v),
        }
    }

    pub fn needs_deadlines(&self) -> bool {
        matches!(self, DagPolicy::Lstf | DagPolicy::Edf | DagPolicy::EdfAc(_))
    }
}

impl fmt::Display for DagPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DagPolicy::Hlf => write!(f, "hlf"),
            DagPolicy::Ish => write!(f, "ish"),
            DagPolicy::Heft => write!(f, "heft"),
            DagPolicy::Dsc => write!(f, "dsc"),
            DagPolicy::Dsh => write!(f, "dsh"),
            DagPolicy::Sa(p) => write!(
                f,
                "sa:{},{},{}",
                p.initial_temperature, p.cooling_rate, p.iters_per_temp
            ),
            DagPolicy::Ga(p) => write!(
                f,
                "ga:{},{},{},{}",
                p.population, p.generations, p.crossover_rate, p.mutation_rate
            ),
            DagPolicy::Lstf => write!(f, "lstf"),
            DagPolicy::Edf => write!(f, "edf"),
            DagPolicy::EdfAc(v) => write!(f, "edf-ac:{v}"),
        }
    }
}

fn policy_err(s: &str) -> Error {
    Error::InvalidPolicy {
        given: s.to_string(),
        valid: DAG_POLICIES.to_string(),
    }
}

fn params(s: &str, rest: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = rest
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| policy_err(s))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(policy_err(s));
    }
    Ok(v)
}

impl FromStr for DagPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let p = match (head, rest) {
            ("hlf", None) => DagPolicy::Hlf,
            ("ish", None) => DagPolicy::Ish,
            ("heft", None) => DagPolicy::Heft,
            ("dsc", None) => DagPolicy::Dsc,
            ("dsh", None) => DagPolicy::Dsh,
            ("lstf", None) => DagPolicy::Lstf,
            ("edf", None) => DagPolicy::Edf,
            ("sa", None) => DagPolicy::Sa(SaParams::default()),
            ("sa", Some(r)) => {
                let v = params(s, r, 3)?;
                let p = SaParams {
                    initial_temperature: v[0],
                    cooling_rate: v[1],
                    iters_per_temp: v[2] as usize,
                    seed: 0,
                };
                if !(p.initial_temperature > 0.0 && p.cooling_rate > 0.0 && p.cooling_rate < 1.0 && v[2] >= 0.0) {
                    return Err(policy_err(s));
                }
                DagPolicy::Sa(p)
            }
            ("ga", None) => DagPolicy::Ga(GaParams::default()),
            ("ga", Some(r)) => {
                let v = params(s, r, 4)?;
                let p = GaParams {
                    population: v[0] as usize,
                    generations: v[1] as usize,
                    crossover_rate: v[2],
                    mutation_rate: v[3],
                    seed: 0,
                };
                let rate = 0.0..=1.0;
                if v[0] < 2.0 || v[1] < 0.0 || !rate.contains(&p.crossover_rate) || !rate.contains(&p.mutation_rate) {
                    return Err(policy_err(s));
                }
                DagPolicy::Ga(p)
            }
            ("edf-ac", Some(v)) => DagPolicy::EdfAc(match v {
                "ff" => AcVariant::FirstFit,
                "bf" => AcVariant::BestFit,
                "wf" => AcVariant::WorstFit,
                _ => return Err(policy_err(s)),
            }),
            _ => return Err(policy_err(s)),
        };
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_strings_round_trip() {
        for s in [
            "hlf",
            "ish",
            "heft",
            "dsc",
            "dsh",
            "lstf",
            "edf",
            "edf-ac:ff",
            "edf-ac:bf",
            "edf-ac:wf",
            "sa:10,0.9,5",
            "ga:8,4,0.9,0.1",
        ] {
            let p: DagPolicy = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        for bad in [
            "hlf:1",
            "edf-ac",
            "edf-ac:xf",
            "sa:0,0.9,1",
            "sa:1,1.5,1",
            "ga:1,1,0.5,0.5",
            "nope",
        ] {
            assert!(
                matches!(bad.parse::<DagPolicy>(), Err(Error::InvalidPolicy { .. })),
                "{bad}"
            );
        }
    }
}
