//! Event loop shared by the gang and static-plan executors.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use crate::energy::{select_level, EnergyPolicy, SlackLedger, SlackRecord};
use crate::error::Result;
use crate::gangsched::{AcMode, EdfGangAc, GangDispatchState, GangPolicy};
use crate::ids::{AppId, ProcId, TaskId};
use crate::platform::Platform;
use crate::time::Time;
use crate::workload::Gang;

use super::faults::{checkpoint_and_rollback, CheckpointState, FailureProcess, FaultConfig};
use super::trace::{EventKind, Outcome, Trace};

type Key = (AppId, TaskId);

/// A planned execution interval handed to the plan executor.
#[derive(Clone, Debug)]
pub(crate) struct PlannedSlot {
    pub app: AppId,
    pub task: TaskId,
    pub amount: Time,
    /// Execution time of `amount` at full frequency and worst-case cost.
    pub full_duration: Time,
    pub frequency: f64,
    pub planned_finish: Time,
    pub release: Time,
    pub duplicate: bool,
    pub parents: Vec<(Key, Time)>,
    pub acf: f64,
    pub cost: Time,
    pub min_cost: Time,
}

/// Static description of a task for arrival and deadline events.
#[derive(Clone, Debug)]
pub(crate) struct TaskInfo {
    pub app: AppId,
    pub task: TaskId,
    pub arrival: Time,
    pub cost: Time,
    pub min_cost: Time,
    pub deadline: Option<Time>,
}

pub(crate) enum Mode {
    Gang {
        policy: GangPolicy,
        state: GangDispatchState,
        gangs: BTreeMap<AppId, Gang>,
        ac: Option<EdfGangAc>,
    },
    Plan {
        queues: Vec<VecDeque<PlannedSlot>>,
        copies: BTreeMap<Key, Vec<(usize, Time)>>,
        wake_at: Vec<Option<Time>>,
    },
}

struct Member {
    app: AppId,
    task: TaskId,
    proc: usize,
    target: Time,
    /// Nominal work per time unit at full frequency and worst-case cost.
    rate1: f64,
    acf: f64,
    cost: Time,
    min_cost: Time,
    duplicate: bool,
    done: Time,
    finished: bool,
}

impl Member {
    fn rate(&self, f: f64) -> f64 {
        self.rate1 * f / self.acf
    }

    fn outcome(&self) -> Outcome {
        if self.done >= self.cost {
            Outcome::Completed
        } else if self.done >= self.min_cost {
            Outcome::Approximate
        } else {
            Outcome::Missed
        }
    }
}

struct Job {
    app: AppId,
    members: Vec<Member>,
    freq: f64,
    seg_start: Time,
    gen: u64,
    ckpt: CheckpointState,
    alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Ev {
    Failure,
    MemberDone { job: usize, member: usize, gen: u64 },
    Tick { job: usize },
    Deadline { app: AppId, task: TaskId },
    Arrive { app: AppId },
    Wake { proc: usize, data: Option<Key> },
    LatestStart { app: AppId },
}

impl Ev {
    /// Processing order among events at the same instant.
    fn rank(&self) -> u8 {
        match self {
            Ev::Failure => 0,
            Ev::MemberDone { .. } => 1,
            Ev::Tick { .. } => 2,
            Ev::Deadline { .. } => 3,
            Ev::Arrive { .. } | Ev::Wake { .. } | Ev::LatestStart { .. } => 4,
        }
    }
}

pub(crate) struct Sim<'a> {
    platform: &'a Platform,
    mode: Mode,
    energy: EnergyPolicy,
    faults: Option<FaultConfig>,
    failures: Option<FailureProcess>,
    ledger: SlackLedger,
    heap: BinaryHeap<Reverse<(Time, u8, u64, Ev)>>,
    seq: u64,
    jobs: Vec<Job>,
    /// Job holding each processor.
    holder: Vec<Option<usize>>,
    tasks: BTreeMap<Key, TaskInfo>,
    by_app: BTreeMap<AppId, Vec<TaskId>>,
    finished: BTreeMap<Key, bool>,
    pending_arrivals: usize,
    pub trace: Trace,
}

impl<'a> Sim<'a> {
    pub fn new(
        platform: &'a Platform,
        mode: Mode,
        tasks: Vec<TaskInfo>,
        energy: EnergyPolicy,
        faults: Option<FaultConfig>,
        seed: u64,
        trace: Trace,
    ) -> Self {
        let n = platform.len();
        let failures = faults.map(|f| FailureProcess::new(f.lambda, seed));
        let mut sim = Sim {
            platform,
            mode,
            energy,
            faults,
            failures,
            ledger: SlackLedger::new(n),
            heap: BinaryHeap::new(),
            seq: 0,
            jobs: Vec::new(),
            holder: vec![None; n],
            tasks: BTreeMap::new(),
            by_app: BTreeMap::new(),
            finished: BTreeMap::new(),
            pending_arrivals: 0,
            trace,
        };
        let mut apps: BTreeMap<AppId, Time> = BTreeMap::new();
        for t in tasks {
            let a = apps.entry(t.app).or_insert(t.arrival);
            *a = (*a).min(t.arrival);
            if let Some(d) = t.deadline {
                sim.push(
                    d,
                    Ev::Deadline {
                        app: t.app,
                        task: t.task,
                    },
                );
            }
            sim.by_app.entry(t.app).or_default().push(t.task);
            sim.finished.insert((t.app, t.task), false);
            sim.tasks.insert((t.app, t.task), t);
        }
        for (app, at) in apps {
            sim.pending_arrivals += 1;
            sim.push(at, Ev::Arrive { app });
        }
        if let Some(t) = sim.failures.as_mut().and_then(|f| f.next_after(Time::ZERO)) {
            sim.push(t, Ev::Failure);
        }
        sim
    }

    fn push(&mut self, t: Time, ev: Ev) {
        self.seq += 1;
        self.heap.push(Reverse((t, ev.rank(), self.seq, ev)));
    }

    fn work_remaining(&self) -> bool {
        if self.pending_arrivals > 0 || self.jobs.iter().any(|j| j.alive) {
            return true;
        }
        match &self.mode {
            Mode::Gang { state, .. } => state.waiting().next().is_some(),
            Mode::Plan { queues, .. } => queues.iter().any(|q| !q.is_empty()),
        }
    }

    pub fn run(mut self) -> Result<Trace> {
        while let Some(Reverse((now, _, _, _))) = self.heap.peek().copied() {
            if !self.work_remaining() {
                break;
            }
            while let Some(Reverse((t, _, _, ev))) = self.heap.peek().copied() {
                if t != now {
                    break;
                }
                self.heap.pop();
                self.handle(now, ev)?;
            }
            self.dispatch(now);
        }
        Ok(self.trace)
    }

    fn handle(&mut self, now: Time, ev: Ev) -> Result<()> {
        match ev {
            Ev::Arrive { app } => self.arrive(now, app)?,
            Ev::MemberDone { job, member, gen } => {
                if self.jobs[job].alive && self.jobs[job].gen == gen {
                    self.member_done(now, job, member);
                }
            }
            Ev::Tick { job } => self.tick(now, job),
            Ev::Failure => self.failure(now),
            Ev::Deadline { app, task } => self.deadline(now, app, task),
            Ev::LatestStart { app } => self.latest_start(now, app),
            Ev::Wake { proc, data } => {
                if let Mode::Plan { wake_at, .. } = &mut self.mode {
                    if wake_at[proc] == Some(now) {
                        wake_at[proc] = None;
                    }
                }
                if let Some((app, task)) = data {
                    let processor = self.platform.processor(proc).id;
                    self.trace.push(now, EventKind::DataReady { app, task, processor });
                }
            }
        }
        Ok(())
    }

    fn arrive(&mut self, now: Time, app: AppId) -> Result<()> {
        self.pending_arrivals -= 1;
        for task in self.by_app.get(&app).cloned().unwrap_or_default() {
            let t = &self.tasks[&(app, task)];
            let kind = EventKind::Arrival {
                app,
                task,
                cost: t.cost,
                min_cost: t.min_cost,
                deadline: t.deadline,
            };
            self.trace.push(now, kind);
        }
        if let Mode::Gang { state, gangs, ac, .. } = &mut self.mode {
            let g = &gangs[&app];
            state.admit(g, self.platform)?;
            if let (Some(ac), Some(d)) = (ac, g.deadline()) {
                if ac.mode == AcMode::Restricted {
                    let window = g
                        .tasks
                        .iter()
                        .map(|t| t.min_cost.div_rate(self.platform.processor(0).speed_factor))
                        .max()
                        .unwrap_or(Time::ZERO);
                    let ls = (d - window).max(now);
                    self.push(ls, Ev::LatestStart { app });
                }
            }
        }
        Ok(())
    }

    /// Brings member progress up to `now`.
    fn settle(&mut self, job: usize, now: Time) {
        let j = &mut self.jobs[job];
        let elapsed = (now - j.seg_start).max(Time::ZERO);
        for m in j.members.iter_mut().filter(|m| !m.finished) {
            let gained = elapsed.scale(m.rate(j.freq));
            m.done = (m.done + gained).min(m.target - Time::RESOLUTION).max(m.done);
        }
        j.seg_start = j.seg_start.max(now);
    }

    /// Schedules completion of every unfinished member from the current
    /// segment start.
    fn schedule_completions(&mut self, job: usize) {
        let j = &self.jobs[job];
        let gen = j.gen;
        let evs: Vec<(Time, Ev)> = j
            .members
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.finished)
            .map(|(k, m)| {
                let t = j.seg_start + (m.target - m.done).div_rate(m.rate(j.freq));
                (t, Ev::MemberDone { job, member: k, gen })
            })
            .collect();
        for (t, ev) in evs {
            self.push(t, ev);
        }
    }

    fn start_job(&mut self, now: Time, app: AppId, members: Vec<Member>, freq: f64) {
        let job = self.jobs.len();
        for m in &members {
            self.holder[m.proc] = Some(job);
            let kind = EventKind::SlotStart {
                app: m.app,
                task: m.task,
                processor: self.platform.processor(m.proc).id,
                frequency: freq,
                duplicate: m.duplicate,
            };
            self.trace.push(now, kind);
        }
        let n = members.len();
        self.jobs.push(Job {
            app,
            members,
            freq,
            seg_start: now,
            gen: 0,
            ckpt: CheckpointState::new(now, n),
            alive: true,
        });
        self.schedule_completions(job);
        if let Some(k) = self.faults.and_then(|f| f.checkpoint_interval) {
            self.push(now + k, Ev::Tick { job });
        }
    }

    fn finish_member(&mut self, now: Time, job: usize, k: usize, outcome: Outcome) {
        let m = &mut self.jobs[job].members[k];
        m.finished = true;
        let (app, task, proc, done, dup) = (m.app, m.task, m.proc, m.done, m.duplicate);
        let kind = EventKind::SlotFinish {
            app,
            task,
            processor: self.platform.processor(proc).id,
            executed: done,
            outcome,
            duplicate: dup,
        };
        self.trace.push(now, kind);
        if !dup {
            self.finished.insert((app, task), true);
        }
        if let Mode::Plan { copies, .. } = &mut self.mode {
            copies.entry((app, task)).or_default().push((proc, now));
        }
    }

    fn end_job(&mut self, job: usize) {
        let j = &mut self.jobs[job];
        j.alive = false;
        j.gen += 1;
        let app = j.app;
        for m in &j.members {
            self.holder[m.proc] = None;
        }
        if let Mode::Gang { state, .. } = &mut self.mode {
            state.release(app);
        }
    }

    fn member_done(&mut self, now: Time, job: usize, k: usize) {
        let (proc, worst, actual) = {
            let j = &mut self.jobs[job];
            let m = &mut j.members[k];
            m.done = m.target;
            let worst = m.target.div_rate(m.rate1 * j.freq);
            (m.proc, worst, m.target.div_rate(m.rate(j.freq)))
        };
        let outcome = self.jobs[job].members[k].outcome();
        self.finish_member(now, job, k, outcome);
        if self.energy == EnergyPolicy::SlackReclaim {
            let m = &self.jobs[job].members[k];
            let record = SlackRecord {
                app: m.app,
                task: m.task,
                worst_case: worst,
                actual,
            };
            self.ledger.credit(proc, record);
        }
        if self.jobs[job].members.iter().all(|m| m.finished) {
            self.end_job(job);
        }
    }

    /// Ends a running job early with what its members have done so far.
    fn terminate(&mut self, now: Time, job: usize) {
        self.settle(job, now);
        for k in 0..self.jobs[job].members.len() {
            if !self.jobs[job].members[k].finished {
                let o = self.jobs[job].members[k].outcome();
                self.finish_member(now, job, k, o);
            }
        }
        self.end_job(job);
    }

    fn take_checkpoint(&mut self, now: Time, job: usize) {
        self.settle(job, now);
        let j = &mut self.jobs[job];
        let executed: Vec<Time> = j.members.iter().map(|m| m.done).collect();
        j.ckpt.record(now, &executed);
        let tasks = j.members.iter().map(|m| m.task).collect();
        let app = j.app;
        self.trace.push(now, EventKind::CheckpointTick { app, tasks, executed });
        let overhead = self.faults.map_or(Time::ZERO, |f| f.overhead);
        if overhead.is_positive() {
            let j = &mut self.jobs[job];
            j.seg_start = now + overhead;
            j.gen += 1;
            self.schedule_completions(job);
        }
    }

    fn tick(&mut self, now: Time, job: usize) {
        if !self.jobs[job].alive {
            return;
        }
        if self.jobs[job].ckpt.global() < now {
            self.take_checkpoint(now, job);
        }
        let k = self
            .faults
            .and_then(|f| f.checkpoint_interval)
            .expect("ticks need an interval");
        self.push(now + k, Ev::Tick { job });
    }

    fn failure(&mut self, now: Time) {
        if let Some(t) = self.failures.as_mut().and_then(|f| f.next_after(now)) {
            self.push(t, Ev::Failure);
        }
        let busy: Vec<usize> = (0..self.holder.len()).filter(|&p| self.holder[p].is_some()).collect();
        if busy.is_empty() {
            let kind = EventKind::Failure {
                processor: None,
                app: None,
                lost_work: Time::ZERO,
                member_loss: Vec::new(),
                restored_to: None,
                terminated: false,
            };
            self.trace.push(now, kind);
            return;
        }
        let p = busy[self.failures.as_mut().expect("failures enabled").pick(busy.len())];
        let job = self.holder[p].expect("busy processor has a job");
        let processor = Some(self.platform.processor(p).id);
        let app = self.jobs[job].app;
        let interval = self.faults.and_then(|f| f.checkpoint_interval);
        if let Some(k) = interval {
            if self.jobs[job].ckpt.due_at(k, now) {
                self.take_checkpoint(now, job);
            }
        }
        self.settle(job, now);
        let executed: Vec<Time> = self.jobs[job].members.iter().map(|m| m.done).collect();
        let mins: Vec<Time> = self.jobs[job].members.iter().map(|m| m.min_cost).collect();
        let saved = self.jobs[job].ckpt.saved();

        let ac = match &self.mode {
            Mode::Gang { ac, .. } => *ac,
            Mode::Plan { .. } => None,
        };
        if ac.is_some_and(|ac| ac.ends_after_failure(&saved, &mins)) {
            let member_loss: Vec<Time> = executed
                .iter()
                .zip(&saved)
                .zip(&self.jobs[job].members)
                .map(|((&e, &s), m)| {
                    if m.finished {
                        Time::ZERO
                    } else {
                        (e - s).max(Time::ZERO)
                    }
                })
                .collect();
            let kind = EventKind::Failure {
                processor,
                app: Some(app),
                lost_work: member_loss.iter().copied().sum(),
                member_loss,
                restored_to: Some(self.jobs[job].ckpt.global()),
                terminated: true,
            };
            self.trace.push(now, kind);
            for (m, &s) in self.jobs[job].members.iter_mut().zip(&saved) {
                if !m.finished {
                    m.done = s;
                }
            }
            for k in 0..self.jobs[job].members.len() {
                if !self.jobs[job].members[k].finished {
                    let o = self.jobs[job].members[k].outcome();
                    self.finish_member(now, job, k, o);
                }
            }
            self.end_job(job);
            return;
        }

        let rb = match interval {
            Some(k) => checkpoint_and_rollback(&mut self.jobs[job].ckpt, k, now, &executed).expect("positive interval"),
            None => checkpoint_and_rollback(&mut self.jobs[job].ckpt, Time::MAX, now, &executed).expect("positive"),
        };
        let kind = EventKind::Failure {
            processor,
            app: Some(app),
            lost_work: rb.lost,
            member_loss: executed
                .iter()
                .zip(&rb.restored)
                .map(|(&e, &r)| (e - r).max(Time::ZERO))
                .collect(),
            restored_to: Some(rb.checkpoint),
            terminated: false,
        };
        self.trace.push(now, kind);
        let freq = self.jobs[job].freq;
        for k in 0..self.jobs[job].members.len() {
            let (was_running, restored) = {
                let m = &self.jobs[job].members[k];
                (!m.finished, rb.restored[k])
            };
            let m = &self.jobs[job].members[k];
            let (app, task, proc, dup) = (m.app, m.task, m.proc, m.duplicate);
            let processor = self.platform.processor(proc).id;
            if was_running {
                let kind = EventKind::SlotFinish {
                    app,
                    task,
                    processor,
                    executed: restored,
                    outcome: Outcome::Interrupted,
                    duplicate: dup,
                };
                self.trace.push(now, kind);
            }
            let m = &mut self.jobs[job].members[k];
            m.done = restored;
            if m.done < m.target {
                m.finished = false;
                if !dup {
                    self.finished.insert((app, task), false);
                }
                let kind = EventKind::SlotStart {
                    app,
                    task,
                    processor,
                    frequency: freq,
                    duplicate: dup,
                };
                self.trace.push(now, kind);
            }
        }
        let j = &mut self.jobs[job];
        j.seg_start = now;
        j.gen += 1;
        self.schedule_completions(job);
    }

    fn deadline(&mut self, now: Time, app: AppId, task: TaskId) {
        if self.finished.get(&(app, task)) == Some(&false) {
            self.trace.push(now, EventKind::DeadlineReached { app, task });
        }
        let Mode::Gang {
            ac: Some(ac), gangs, ..
        } = &self.mode
        else {
            return;
        };
        let ac = *ac;
        if gangs.get(&app).and_then(|g| g.deadline()) != Some(now) {
            return;
        }
        let Some(job) = self.jobs.iter().position(|j| j.alive && j.app == app) else {
            return;
        };
        self.settle(job, now);
        let done: Vec<Time> = self.jobs[job].members.iter().map(|m| m.done).collect();
        let mins: Vec<Time> = self.jobs[job].members.iter().map(|m| m.min_cost).collect();
        if ac.ends_at_deadline(&done, &mins) {
            self.terminate(now, job);
        }
    }

    fn latest_start(&mut self, now: Time, app: AppId) {
        let Mode::Gang {
            state, ac: Some(ac), ..
        } = &self.mode
        else {
            return;
        };
        let ac = *ac;
        let Some(w) = state.waiting_gang(app) else {
            return;
        };
        let mut blockers: Vec<usize> = w.members.iter().filter_map(|&(_, p)| self.holder[p]).collect();
        blockers.sort();
        blockers.dedup();
        for &b in &blockers {
            self.settle(b, now);
        }
        let all_yield = blockers.iter().all(|&b| {
            let done: Vec<Time> = self.jobs[b].members.iter().map(|m| m.done).collect();
            let mins: Vec<Time> = self.jobs[b].members.iter().map(|m| m.min_cost).collect();
            ac.yields(&done, &mins)
        });
        if all_yield {
            for b in blockers {
                self.terminate(now, b);
            }
        }
    }

    /// Frequency for a job given per-member full-speed durations and the
    /// time by which it should end.
    fn choose_frequency(&mut self, procs: &[usize], durations: &[Time], window: Option<Time>, planned: f64) -> f64 {
        if self.energy != EnergyPolicy::SlackReclaim {
            return planned;
        }
        let mut ratio: f64 = 0.0;
        for (&p, &d) in procs.iter().zip(durations) {
            if !d.is_positive() {
                continue;
            }
            let s = self.ledger.available(p);
            let mut r = d.as_f64() / (d.div_rate(planned) + s).as_f64();
            if let Some(w) = window {
                r = if w.is_positive() {
                    r.max(d.as_f64() / w.as_f64())
                } else {
                    1.0
                };
            }
            ratio = ratio.max(r);
        }
        if ratio >= planned {
            return planned;
        }
        let f = procs
            .iter()
            .map(|&p| select_level(&self.platform.processor(p).frequency_levels, ratio))
            .fold(0.0, f64::max)
            .min(planned);
        for (&p, &d) in procs.iter().zip(durations) {
            self.ledger.spend(p, d.div_rate(f) - d.div_rate(planned));
        }
        f
    }

    fn dispatch(&mut self, now: Time) {
        if matches!(self.mode, Mode::Gang { .. }) {
            self.dispatch_gangs(now);
        } else {
            self.dispatch_plans(now);
        }
        for p in 0..self.holder.len() {
            if self.holder[p].is_none() {
                self.ledger.expire(p);
            }
        }
    }

    fn dispatch_gangs(&mut self, now: Time) {
        let Mode::Gang {
            policy,
            state,
            gangs,
            ac,
        } = &mut self.mode
        else {
            return;
        };
        let (_, started) = policy.dispatch(state, now);
        let ac = *ac;
        let mut jobs = Vec::new();
        for d in started {
            let g = &gangs[&d.gang];
            let members: Vec<Member> = d
                .members
                .iter()
                .map(|&(task, proc)| {
                    let t = g.tasks.iter().find(|t| t.id == task).expect("member of its gang");
                    Member {
                        app: g.id,
                        task,
                        proc,
                        target: ac.map_or(t.cost, |ac| ac.target(t.cost, t.min_cost)),
                        rate1: self.platform.processor(proc).speed_factor,
                        acf: t.actual_cost_factor,
                        cost: t.cost,
                        min_cost: t.min_cost,
                        duplicate: false,
                        done: Time::ZERO,
                        finished: false,
                    }
                })
                .collect();
            jobs.push((g.id, g.deadline(), members));
        }
        for (app, deadline, members) in jobs {
            let procs: Vec<usize> = members.iter().map(|m| m.proc).collect();
            let durs: Vec<Time> = members.iter().map(|m| m.target.div_rate(m.rate1)).collect();
            let f = self.choose_frequency(&procs, &durs, deadline.map(|d| d - now), 1.0);
            self.start_job(now, app, members, f);
        }
    }

    fn dispatch_plans(&mut self, now: Time) {
        for p in 0..self.holder.len() {
            if self.holder[p].is_some() {
                continue;
            }
            let Mode::Plan {
                queues,
                copies,
                wake_at,
            } = &mut self.mode
            else {
                return;
            };
            let Some(head) = queues[p].front() else {
                continue;
            };
            let mut ready = Some(head.release);
            let mut last_parent = None;
            for &(key, comm) in &head.parents {
                let arrival = copies
                    .get(&key)
                    .and_then(|cs| cs.iter().map(|&(q, f)| if q == p { f } else { f + comm }).min());
                match (ready, arrival) {
                    (Some(r), Some(a)) => {
                        if a > r {
                            last_parent = Some(a);
                        }
                        ready = Some(r.max(a));
                    }
                    _ => ready = None,
                }
            }
            let Some(ready) = ready else {
                continue;
            };
            if ready > now {
                if wake_at[p] != Some(ready) {
                    wake_at[p] = Some(ready);
                    let data = (last_parent == Some(ready)).then_some((head.app, head.task));
                    self.push(ready, Ev::Wake { proc: p, data });
                }
                continue;
            }
            let slot = queues[p].pop_front().expect("head exists");
            let member = Member {
                app: slot.app,
                task: slot.task,
                proc: p,
                target: slot.amount,
                rate1: slot.amount.as_f64() / slot.full_duration.as_f64(),
                acf: slot.acf,
                cost: if slot.duplicate { slot.amount } else { slot.cost },
                min_cost: slot.min_cost,
                duplicate: slot.duplicate,
                done: Time::ZERO,
                finished: false,
            };
            let window = slot.planned_finish - now;
            let f = self.choose_frequency(&[p], &[slot.full_duration], Some(window), slot.frequency);
            self.start_job(now, slot.app, vec![member], f);
        }
    }
}

impl std::fmt::Debug for Sim<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sim").field("jobs", &self.jobs.len()).finish()
    }
}

#[allow(dead_code)]
fn proc_ids(platform: &Platform) -> Vec<ProcId> {
    platform.processors().iter().map(|p| p.id).collect()
}
