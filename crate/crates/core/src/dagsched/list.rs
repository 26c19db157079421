use std::collections::BTreeSet;

use crate::error::Result;
use crate::ids::TaskId;
use crate::platform::{Platform, ScheduledSlot, Timeline, Timelines};
use crate::time::Time;
use crate::workload::{space_time, weighted_levels, Dag};

use super::DagSchedule;

/// Finish times of every placed copy of every task, by processor index.
#[derive(Clone, Debug)]
pub(crate) struct Placed {
    pub copies: Vec<Vec<(usize, Time)>>,
    pub slots: Vec<ScheduledSlot>,
}

impl Placed {
    pub fn new(n: usize) -> Self {
        Placed {
            copies: vec![Vec::new(); n],
            slots: Vec::new(),
        }
    }

    /// Time at which all inputs of task `i` are available on processor `p`.
    pub fn data_arrival(&self, dag: &Dag, i: usize, p: usize) -> Time {
        dag.parents(i)
            .iter()
            .map(|&(u, comm)| self.arrival_from(u, comm, p))
            .max()
            .unwrap_or(Time::ZERO)
    }

    pub fn arrival_from(&self, u: usize, comm: Time, p: usize) -> Time {
        self.copies[u]
            .iter()
            .map(|&(q, f)| if q == p { f } else { f + comm })
            .min()
            .expect("parents are placed before children")
    }

    pub fn ready(&self, dag: &Dag, i: usize, p: usize) -> Time {
        dag.release(i).max(self.data_arrival(dag, i, p))
    }

    /// Places a full-cost copy of task `i` on `tl` (processor index `p`).
    pub fn place(&mut self, dag: &Dag, i: usize, p: usize, tl: &mut Timeline, start: Time, duplicate: bool) -> Time {
        self.place_amount(dag, i, p, tl, start, dag.task(i).cost, duplicate)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn place_amount(
        &mut self,
        dag: &Dag,
        i: usize,
        p: usize,
        tl: &mut Timeline,
        start: Time,
        amount: Time,
        duplicate: bool,
    ) -> Time {
        let t = dag.task(i);
        let finish = start + amount.div_rate(tl.speed);
        let slot = ScheduledSlot {
            app: dag.id(),
            task: t.id,
            processor: tl.processor,
            start,
            finish,
            executed: amount,
            frequency: 1.0,
            duplicate,
        };
        tl.push(slot).expect("placement targets a free interval");
        self.slots.push(slot);
        self.copies[i].push((p, finish));
        finish
    }
}

/// Ready-list driver: repeatedly takes the ready task with the smallest
/// `(rank, id)` and hands it to `place`.
pub(crate) fn for_each_ready(dag: &Dag, rank: &[i64], mut place: impl FnMut(usize) -> Result<()>) -> Result<()> {
    let mut missing: Vec<usize> = (0..dag.len()).map(|i| dag.parents(i).len()).collect();
    let mut ready: BTreeSet<(i64, TaskId, usize)> = dag.entries().map(|i| (rank[i], dag.task(i).id, i)).collect();
    while let Some((_, _, i)) = ready.pop_first() {
        place(i)?;
        for &(c, _) in dag.children(i) {
            missing[c] -= 1;
            if missing[c] == 0 {
                ready.insert((rank[c], dag.task(c).id, c));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Select {
    EarliestStart,
    EarliestFinish,
}

pub(crate) fn list_schedule(
    dag: &Dag,
    tl: &mut [Timeline],
    rank: &[i64],
    select: Select,
    insertion: bool,
) -> DagSchedule {
    let mut placed = Placed::new(dag.len());
    for_each_ready(dag, rank, |i| {
        let cost = dag.task(i).cost;
        let (p, start) = (0..tl.len())
            .map(|p| {
                let dur = cost.div_rate(tl[p].speed);
                let s = tl[p].earliest_start(placed.ready(dag, i, p), dur, insertion);
                let key = match select {
                    Select::EarliestStart => s,
                    Select::EarliestFinish => s + dur,
                };
                (key, p, s)
            })
            .min()
            .map(|(_, p, s)| (p, s))
            .expect("platform has processors");
        placed.place(dag, i, p, &mut tl[p], start, false);
        Ok(())
    })
    .expect("placement is infallible");
    DagSchedule::new(dag.id(), placed.slots)
}

pub(crate) fn level_rank(dag: &Dag) -> Vec<i64> {
    dag.levels().iter().map(|l| -l.ticks()).collect()
}

pub(crate) fn hlf_on(dag: &Dag, tl: &mut [Timeline]) -> DagSchedule {
    list_schedule(dag, tl, &level_rank(dag), Select::EarliestStart, false)
}

pub(crate) fn ish_on(dag: &Dag, tl: &mut [Timeline]) -> DagSchedule {
    list_schedule(dag, tl, &level_rank(dag), Select::EarliestStart, true)
}

/// Levels under mean execution cost over the processors.
pub(crate) fn mean_cost_levels(dag: &Dag, tl: &[Timeline]) -> Vec<Time> {
    let mean_inv = tl.iter().map(|t| 1.0 / t.speed).sum::<f64>() / tl.len() as f64;
    let w: Vec<Time> = dag.tasks().iter().map(|t| t.cost.scale(mean_inv)).collect();
    weighted_levels(dag, &w, |c| c)
}

pub(crate) fn heft_on(dag: &Dag, tl: &mut [Timeline]) -> DagSchedule {
    let rank: Vec<i64> = mean_cost_levels(dag, tl).iter().map(|l| -l.ticks()).collect();
    list_schedule(dag, tl, &rank, Select::EarliestFinish, true)
}

pub(crate) fn lstf_on(dag: &Dag, tl: &mut [Timeline]) -> Result<DagSchedule> {
    let rank = (0..dag.len())
        .map(|i| space_time(dag, dag.task(i).id).map(|t| t.ticks()))
        .collect::<Result<Vec<_>>>()?;
    Ok(list_schedule(dag, tl, &rank, Select::EarliestStart, false))
}

/// Highest level first: ready tasks in descending level order, each on the
/// processor giving the earliest start after its last slot.
pub fn hlf(dag: &Dag, platform: &Platform) -> DagSchedule {
    hlf_on(dag, &mut Timelines::new(platform).0)
}

/// HLF priorities with insertion into idle gaps that fit the whole task.
pub fn ish(dag: &Dag, platform: &Platform) -> DagSchedule {
    ish_on(dag, &mut Timelines::new(platform).0)
}

/// Priorities from levels under mean execution cost; each task goes to the
/// processor giving the earliest finish, gaps included.
pub fn heft(dag: &Dag, platform: &Platform) -> DagSchedule {
    heft_on(dag, &mut Timelines::new(platform).0)
}

/// Least space-time first; needs a graph deadline.
pub fn lstf(dag: &Dag, platform: &Platform) -> Result<DagSchedule> {
    lstf_on(dag, &mut Timelines::new(platform).0)
}

pub(crate) fn decode_on(dag: &Dag, tl: &mut [Timeline], assignment: &[usize], keys: &[i64]) -> DagSchedule {
    let mut placed = Placed::new(dag.len());
    for_each_ready(dag, keys, |i| {
        let p = assignment[i];
        let start = placed.ready(dag, i, p).max(tl[p].last_finish());
        placed.place(dag, i, p, &mut tl[p], start, false);
        Ok(())
    })
    .expect("placement is infallible");
    DagSchedule::new(dag.id(), placed.slots)
}

/// Builds the schedule defined by a processor per task (`assignment`, by
/// processor index) and a priority key per task (smaller first among ready
/// tasks). Tasks are appended to their processor's timeline.
pub fn decode(dag: &Dag, platform: &Platform, assignment: &[usize], keys: &[i64]) -> DagSchedule {
    decode_on(dag, &mut Timelines::new(platform).0, assignment, keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dagsched::validate_schedule;
    use crate::ids::{ProcId, TaskId};
    use crate::platform::PowerModel;
    use crate::platform::Processor;
    use crate::workload::{validate_dag, DagApp, Edge, Task};

    fn u(v: i64) -> Time {
        Time::units(v)
    }

    fn slot(s: &DagSchedule, id: u32) -> (ProcId, Time, Time) {
        let x = s.primary(TaskId(id)).unwrap();
        (x.processor, x.start, x.finish)
    }

    fn diamond() -> Dag {
        validate_dag(DagApp::new(
            0,
            vec![
                Task::new(0, u(1)),
                Task::new(1, u(2)),
                Task::new(2, u(5)),
                Task::new(3, u(1)),
            ],
            vec![
                Edge::new(0, 1, u(0)),
                Edge::new(0, 2, u(0)),
                Edge::new(1, 3, u(0)),
                Edge::new(2, 3, u(0)),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn hlf_single_task() {
        let d = validate_dag(DagApp::new(0, vec![Task::new(0, u(3))], vec![])).unwrap();
        assert_eq!(slot(&hlf(&d, &Platform::uniform(1)), 0), (ProcId(0), u(0), u(3)));
    }

    #[test]
    fn hlf_higher_level_first() {
        let d = validate_dag(DagApp::new(0, vec![Task::new(0, u(3)), Task::new(1, u(6))], vec![])).unwrap();
        let s = hlf(&d, &Platform::uniform(1));
        assert_eq!(slot(&s, 1).1, u(0));
        assert_eq!(slot(&s, 0).1, u(6));
    }

    #[test]
    fn hlf_diamond_schedules_c_before_b() {
        let d = diamond();
        let p = Platform::uniform(2);
        let s = hlf(&d, &p);
        validate_schedule(&d, &p, &s).unwrap();
        assert_eq!(slot(&s, 2), (ProcId(0), u(1), u(6)));
        assert_eq!(slot(&s, 1), (ProcId(1), u(1), u(3)));
    }

    #[test]
    fn ish_inserts_whole_tasks_into_gaps() {
        let p = Platform::uniform(1);
        // a gap [1,3] on p0 left by a data-ready constraint
        let mut tl = Timelines::new(&p).0;
        let pre = validate_dag(DagApp::new(
            1,
            vec![Task::new(0, u(1)), Task::new(1, u(1)).with_data_ready(u(3))],
            vec![],
        ))
        .unwrap();
        hlf_on(&pre, &mut tl);
        assert_eq!(tl[0].inner_gaps(Time::ZERO)[0].start, u(1));
        let fits = validate_dag(DagApp::new(2, vec![Task::new(0, u(2))], vec![])).unwrap();
        let s = ish_on(&fits, &mut tl.clone());
        assert_eq!(slot(&s, 0).1, u(1));
        let too_big = validate_dag(DagApp::new(2, vec![Task::new(0, u(3))], vec![])).unwrap();
        let s = ish_on(&too_big, &mut tl.clone());
        assert_eq!(slot(&s, 0).1, u(4));
    }

    #[test]
    fn ish_equals_hlf_without_gaps() {
        let d = diamond();
        let p = Platform::uniform(2);
        assert_eq!(hlf(&d, &p), ish(&d, &p));
    }

    #[test]
    fn heft_cases() {
        let d = diamond();
        let p = Platform::uniform(2);
        assert_eq!(mean_cost_levels(&d, &Timelines::new(&p).0), d.levels().to_vec());

        let one = validate_dag(DagApp::new(0, vec![Task::new(0, u(4))], vec![])).unwrap();
        let het = Platform::new(
            vec![Processor::new(0, 1.0), Processor::new(1, 2.0)],
            PowerModel::default(),
        )
        .unwrap();
        assert_eq!(slot(&heft(&one, &het), 0), (ProcId(1), u(0), u(2)));

        let chain = validate_dag(DagApp::new(
            0,
            vec![Task::new(0, u(1)), Task::new(1, u(1))],
            vec![Edge::new(0, 1, u(10))],
        ))
        .unwrap();
        let s = heft(&chain, &p);
        assert_eq!(slot(&s, 0).0, slot(&s, 1).0);
        assert_eq!(s.makespan(), u(2));
    }

    #[test]
    fn lstf_cases() {
        let d = validate_dag(
            DagApp::new(
                0,
                vec![Task::new(0, u(2)), Task::new(1, u(6)), Task::new(2, u(6))],
                vec![],
            )
            .with_deadline(u(6)),
        )
        .unwrap();
        // space-time {4, 0, 0}: ties go to the smaller id
        let s = lstf(&d, &Platform::uniform(1)).unwrap();
        assert_eq!(slot(&s, 1).1, u(0));
        assert_eq!(slot(&s, 2).1, u(6));
        assert_eq!(slot(&s, 0).1, u(12));
        let single = validate_dag(DagApp::new(0, vec![Task::new(0, u(2))], vec![]).with_deadline(u(2))).unwrap();
        assert_eq!(slot(&lstf(&single, &Platform::uniform(1)).unwrap(), 0).1, u(0));
        let none = validate_dag(DagApp::new(0, vec![Task::new(0, u(2))], vec![])).unwrap();
        assert!(lstf(&none, &Platform::uniform(1)).is_err());
    }

    #[test]
    fn decode_reproduces_hlf_order() {
        let d = diamond();
        let p = Platform::uniform(2);
        let h = hlf(&d, &p);
        let assignment: Vec<usize> = (0..4)
            .map(|i| h.primary(TaskId(i)).unwrap().processor.0 as usize)
            .collect();
        let keys: Vec<i64> = (0..4).map(|i| h.primary(TaskId(i)).unwrap().start.ticks()).collect();
        assert_eq!(decode(&d, &p, &assignment, &keys), h);
    }
}
