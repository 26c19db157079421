use serde::{Deserialize, Serialize};

use crate::ids::{ProcId, TaskId};
use crate::platform::{Platform, Timeline, Timelines};
use crate::time::Time;
use crate::workload::Dag;

use super::list::{for_each_ready, level_rank, Placed};
use super::DagSchedule;

/// One accepted duplication: a copy of `duplicated` was placed on
/// `processor`, moving the start of `task` there from `start_before` to
/// `start_after`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DshStep {
    pub task: TaskId,
    pub duplicated: TaskId,
    pub processor: ProcId,
    pub start_before: Time,
    pub start_after: Time,
}

#[derive(Clone)]
struct Trial {
    placed: Placed,
    tl: Timeline,
    steps: Vec<DshStep>,
}

fn est(dag: &Dag, t: &Trial, i: usize, p: usize) -> Time {
    t.placed.ready(dag, i, p).max(t.tl.last_finish())
}

/// Earliest start of task `i` on processor `p`, duplicating the parent whose
/// data arrives last into the idle slot before it, recursively, for as long
/// as that moves the start earlier.
fn improve(dag: &Dag, i: usize, p: usize, t: &mut Trial) -> Time {
    loop {
        let s = est(dag, t, i, p);
        let floor = t.tl.last_finish().max(dag.release(i));
        let crit = dag
            .parents(i)
            .iter()
            .filter(|&&(u, _)| t.placed.copies[u].iter().all(|&(q, _)| q != p))
            .map(|&(u, c)| (t.placed.arrival_from(u, c, p), std::cmp::Reverse(dag.task(u).id), u))
            .max();
        let Some((arrival, _, u)) = crit else {
            return s;
        };
        if arrival <= floor {
            return s;
        }
        let mut trial = t.clone();
        let su = improve(dag, u, p, &mut trial);
        trial.placed.place(dag, u, p, &mut trial.tl, su, true);
        let s2 = est(dag, &trial, i, p);
        if s2 >= s {
            return s;
        }
        trial.steps.push(DshStep {
            task: dag.task(i).id,
            duplicated: dag.task(u).id,
            processor: t.tl.processor,
            start_before: s,
            start_after: s2,
        });
        *t = trial;
    }
}

pub(crate) fn dsh_on(dag: &Dag, tl: &mut [Timeline]) -> (DagSchedule, Vec<DshStep>) {
    let mut placed = Placed::new(dag.len());
    let mut steps = Vec::new();
    for_each_ready(dag, &level_rank(dag), |i| {
        let mut best: Option<(Time, usize, Trial)> = None;
        for p in 0..tl.len() {
            let mut trial = Trial {
                placed: placed.clone(),
                tl: tl[p].clone(),
                steps: Vec::new(),
            };
            let s = improve(dag, i, p, &mut trial);
            if best.as_ref().is_none_or(|b| s < b.0) {
                best = Some((s, p, trial));
            }
        }
        let (s, p, mut trial) = best.expect("platform has processors");
        trial.placed.place(dag, i, p, &mut trial.tl, s, false);
        placed = trial.placed;
        tl[p] = trial.tl;
        steps.extend(trial.steps);
        Ok(())
    })
    .expect("placement is infallible");
    (DagSchedule::new(dag.id(), placed.slots), steps)
}

/// Duplication scheduling heuristic: HLF priorities; on every candidate
/// processor the idle slot before a task may receive copies of its
/// predecessors when that lets the task start earlier.
pub fn dsh(dag: &Dag, platform: &Platform) -> DagSchedule {
    dsh_with_log(dag, platform).0
}

/// As [`dsh`], also returning every accepted duplication step.
pub fn dsh_with_log(dag: &Dag, platform: &Platform) -> (DagSchedule, Vec<DshStep>) {
    dsh_on(dag, &mut Timelines::new(platform).0)
}
