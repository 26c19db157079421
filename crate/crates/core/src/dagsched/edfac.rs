use std::fmt;

use crate::error::{Error, Result};
use crate::platform::{Platform, Timeline, Timelines};
use crate::time::Time;
use crate::workload::{min_amount_for_error_limit, Dag, Task};

use super::list::{for_each_ready, list_schedule, Placed, Select};
use super::DagSchedule;

/// Gap selection rule for partial insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcVariant {
    /// Earliest gap that holds the required minimum; inserts as much as fits.
    FirstFit,
    /// Gap holding the largest amount; ties to the least unused time, then
    /// the earliest gap.
    BestFit,
    /// Gap leaving the most unused time after the required minimum, which
    /// is all that gets inserted.
    WorstFit,
}

impl fmt::Display for AcVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AcVariant::FirstFit => "ff",
            AcVariant::BestFit => "bf",
            AcVariant::WorstFit => "wf",
        })
    }
}

/// Where and how much of a task runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AcPlacement {
    /// Processor index.
    pub processor: usize,
    pub start: Time,
    pub finish: Time,
    /// Work executed.
    pub amount: Time,
    /// False when no gap qualified and the task was appended in full.
    pub in_gap: bool,
}

pub(crate) fn deadline_of(dag: &Dag, i: usize) -> Result<Time> {
    let t = dag.task(i);
    t.deadline.or(dag.deadline()).ok_or(Error::NoDeadline(t.id))
}

/// Largest amount of work not above `cap` that runs within `room` at `speed`.
fn fit_amount(cap: Time, room: Time, speed: f64) -> Time {
    let mut a = cap.min(room.scale(speed));
    while a.is_positive() && a.div_rate(speed) > room {
        a -= Time::RESOLUTION;
    }
    a
}

/// Chooses a placement for `task` with deadline `deadline`. `ready[p]` is the
/// earliest start on processor `p` (release and input data); `child_limit`
/// is the smallest input-error limit among the task's children.
///
/// On each processor the bounded idle gaps are examined: a gap qualifies if,
/// after clipping it to `[ready, deadline]`, it holds the task's required
/// minimum (its mandatory part, raised so that the output error stays within
/// `child_limit`). Without a qualifying gap the whole task is appended after
/// the last slot. The processor with the earliest start wins; ties go to
/// the lower index.
pub fn edf_ac_insert(
    task: &Task,
    deadline: Time,
    ready: &[Time],
    child_limit: f64,
    timelines: &[Timeline],
    variant: AcVariant,
) -> AcPlacement {
    let required = min_amount_for_error_limit(task, child_limit).max(task.min_cost);
    let mut best: Option<AcPlacement> = None;
    for (p, tl) in timelines.iter().enumerate() {
        let speed = tl.speed;
        let need = required.div_rate(speed);
        // (placement, selection key)
        let mut chosen: Option<(AcPlacement, (i64, i64, i64))> = None;
        for g in tl.inner_gaps(Time::ZERO) {
            let start = g.start.max(ready[p]);
            let end = g.end_or_max().min(deadline);
            if end <= start || end - start < need {
                continue;
            }
            let room = end - start;
            let amount = match variant {
                AcVariant::WorstFit => required,
                _ => fit_amount(task.cost, room, speed),
            };
            let dur = amount.div_rate(speed);
            let leftover = room - dur;
            let key = match variant {
                AcVariant::FirstFit => (0, 0, start.ticks()),
                AcVariant::BestFit => (-amount.ticks(), leftover.ticks(), start.ticks()),
                AcVariant::WorstFit => (-leftover.ticks(), start.ticks(), 0),
            };
            if chosen.as_ref().is_none_or(|(_, k)| key < *k) {
                let pl = AcPlacement {
                    processor: p,
                    start,
                    finish: start + dur,
                    amount,
                    in_gap: true,
                };
                chosen = Some((pl, key));
            }
        }
        let pl = match chosen {
            Some((pl, _)) => pl,
            None => {
                let start = ready[p].max(tl.last_finish());
                AcPlacement {
                    processor: p,
                    start,
                    finish: start + task.cost.div_rate(speed),
                    amount: task.cost,
                    in_gap: false,
                }
            }
        };
        if best.as_ref().is_none_or(|b| pl.start < b.start) {
            best = Some(pl);
        }
    }
    best.expect("platform has processors")
}

fn deadline_rank(dag: &Dag) -> Result<Vec<i64>> {
    (0..dag.len()).map(|i| deadline_of(dag, i).map(Time::ticks)).collect()
}

pub(crate) fn edf_on(dag: &Dag, tl: &mut [Timeline]) -> Result<DagSchedule> {
    Ok(list_schedule(
        dag,
        tl,
        &deadline_rank(dag)?,
        Select::EarliestStart,
        false,
    ))
}

pub(crate) fn edf_ac_on(dag: &Dag, tl: &mut [Timeline], variant: AcVariant) -> Result<DagSchedule> {
    let rank = deadline_rank(dag)?;
    let mut placed = Placed::new(dag.len());
    for_each_ready(dag, &rank, |i| {
        let ready: Vec<Time> = (0..tl.len()).map(|p| placed.ready(dag, i, p)).collect();
        let d = deadline_of(dag, i)?;
        let pl = edf_ac_insert(dag.task(i), d, &ready, dag.child_error_limit(i), tl, variant);
        placed.place_amount(dag, i, pl.processor, &mut tl[pl.processor], pl.start, pl.amount, false);
        Ok(())
    })?;
    Ok(DagSchedule::new(dag.id(), placed.slots))
}

/// Earliest deadline first (task deadline, else the graph deadline), each
/// task appended on the processor giving the earliest start.
pub fn edf(dag: &Dag, platform: &Platform) -> Result<DagSchedule> {
    edf_on(dag, &mut Timelines::new(platform).0)
}

/// Earliest deadline first with partial insertion into idle gaps.
pub fn edf_ac(dag: &Dag, platform: &Platform, variant: AcVariant) -> Result<DagSchedule> {
    edf_ac_on(dag, &mut Timelines::new(platform).0, variant)
}
