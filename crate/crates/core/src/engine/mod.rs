//! Deterministic discrete-event simulation of a workload under one policy,
//! with metrics, failure injection and checkpointing.

mod faults;
mod metrics;
mod sim;
mod trace;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::botsched::{caees_select, map_from, BotHeuristic, CaeesChoice, CloudState, Tier, BOT_POLICIES};
use crate::dagsched::{DagPolicy, DAG_POLICIES};
use crate::energy::{mfed_schedule, EnergyPolicy, PeriodicProcessor};
use crate::error::{Error, Result};
use crate::gangsched::{edf_gang_ac, GangDispatchState, GangPolicy, GANG_POLICIES};
use crate::ids::{AppId, TaskId};
use crate::platform::{Platform, Timelines};
use crate::time::Time;
use crate::workload::{validate_dag, Workload};

pub use faults::{checkpoint_and_rollback, inject_failures, CheckpointState, FailureProcess, FaultConfig, Rollback};
pub use metrics::{
    avg_response, avg_tardiness, makespan, precision, task_guarantee_ratio, MetricsReport, TaskRecord, CSV_HEADER,
};
pub use trace::{EventKind, Outcome, SimEvent, Trace, TraceHeader};

use sim::{Mode, PlannedSlot, Sim, TaskInfo};

/// Any scheduling policy the engine can host.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Gang(GangPolicy),
    Dag(DagPolicy),
    Bot(BotHeuristic),
    /// Mandatory-first EDF over a periodic task set.
    Mfed,
}

impl Policy {
    /// Workload class the policy accepts.
    pub fn class(&self) -> &'static str {
        match self {
            Policy::Gang(_) => "gangs",
            Policy::Dag(_) => "dags",
            Policy::Bot(_) => "bots",
            Policy::Mfed => "periodic",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Gang(p) => p.fmt(f),
            Policy::Dag(p) => p.fmt(f),
            Policy::Bot(p) => p.fmt(f),
            Policy::Mfed => write!(f, "mfed"),
        }
    }
}

/// Every accepted policy string.
pub fn valid_policies() -> String {
    format!("{GANG_POLICIES} | {DAG_POLICIES} | {BOT_POLICIES} | mfed")
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mfed" {
            return Ok(Policy::Mfed);
        }
        if let Ok(p) = s.parse() {
            return Ok(Policy::Bot(p));
        }
        if let Ok(p) = s.parse() {
            return Ok(Policy::Gang(p));
        }
        if let Ok(p) = s.parse() {
            return Ok(Policy::Dag(p));
        }
        Err(Error::InvalidPolicy {
            given: s.to_string(),
            valid: valid_policies(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub policy: Policy,
    pub energy: EnergyPolicy,
    pub faults: Option<FaultConfig>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(policy: Policy, seed: u64) -> Self {
        RunConfig {
            policy,
            energy: EnergyPolicy::None,
            faults: None,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub trace: Trace,
}

/// Simulates `workload` on `platform` under `config`.
pub fn run(workload: &Workload, platform: &Platform, config: &RunConfig) -> Result<RunOutput> {
    let class = config.policy.class();
    if let Some(found) = workload.classes().into_iter().find(|&c| c != class) {
        return Err(Error::PolicyWorkloadMismatch {
            policy: config.policy.to_string(),
            found: found.to_string(),
        });
    }
    if config.energy == EnergyPolicy::MfedCcrt && config.policy != Policy::Mfed {
        return Err(Error::PolicyWorkloadMismatch {
            policy: format!("{} with energy {}", config.policy, config.energy),
            found: class.to_string(),
        });
    }
    if let Some(f) = &config.faults {
        f.validate()?;
        if config.policy == Policy::Mfed {
            return Err(Error::InvalidConfig(
                "fault injection is not supported for periodic task sets".into(),
            ));
        }
    }
    let header = TraceHeader {
        policy: config.policy.to_string(),
        energy: config.energy.to_string(),
        seed: config.seed,
        processors: platform.processors().iter().map(|p| p.id).collect(),
        power_model: *platform.power_model(),
        energy_horizon: None,
    };
    let trace = match &config.policy {
        Policy::Mfed => run_periodic(workload, platform, config.energy, Trace::new(header))?,
        policy => {
            let (mode, tasks) = build(workload, platform, policy, config)?;
            Sim::new(
                platform,
                mode,
                tasks,
                config.energy,
                config.faults,
                config.seed,
                Trace::new(header),
            )
            .run()?
        }
    };
    let report = MetricsReport::from_trace(&trace);
    Ok(RunOutput { report, trace })
}

fn build(
    workload: &Workload,
    platform: &Platform,
    policy: &Policy,
    config: &RunConfig,
) -> Result<(Mode, Vec<TaskInfo>)> {
    match policy {
        Policy::Gang(p) => build_gangs(workload, platform, p, config),
        Policy::Dag(p) => build_dags(workload, platform, p, config.seed),
        Policy::Bot(h) => build_bots(workload, platform, *h),
        Policy::Mfed => unreachable!("periodic sets are not event-simulated"),
    }
}

fn build_gangs(
    workload: &Workload,
    platform: &Platform,
    policy: &GangPolicy,
    config: &RunConfig,
) -> Result<(Mode, Vec<TaskInfo>)> {
    let mut tasks = Vec::new();
    let mut gangs = BTreeMap::new();
    for g in &workload.gangs {
        g.validate()?;
        if g.size() > platform.len() {
            return Err(Error::GangTooLarge {
                gang: g.id,
                size: g.size(),
                available: platform.len(),
            });
        }
        for t in &g.tasks {
            tasks.push(TaskInfo {
                app: g.id,
                task: t.id,
                arrival: g.arrival,
                cost: t.cost,
                min_cost: t.min_cost,
                deadline: t.deadline,
            });
        }
        gangs.insert(g.id, g.clone());
    }
    let ac = match policy {
        GangPolicy::EdfGangAc(mode) => {
            let interval = config.faults.and_then(|f| f.checkpoint_interval);
            Some(edf_gang_ac(&workload.gangs, *mode, interval)?)
        }
        _ => None,
    };
    let mut state = GangDispatchState::new(platform.len());
    policy.configure(&mut state);
    let mode = Mode::Gang {
        policy: *policy,
        state,
        gangs,
        ac,
    };
    Ok((mode, tasks))
}

fn build_dags(
    workload: &Workload,
    platform: &Platform,
    policy: &DagPolicy,
    seed: u64,
) -> Result<(Mode, Vec<TaskInfo>)> {
    let mut dags = workload
        .dags
        .iter()
        .cloned()
        .map(validate_dag)
        .collect::<Result<Vec<_>>>()?;
    dags.sort_by_key(|d| (d.arrival(), d.id()));
    let mut timelines = Timelines::new(platform);
    let mut tasks = Vec::new();
    let mut planned: Vec<(Time, PlannedSlot)> = Vec::new();
    let mut procs = Vec::new();
    for dag in &dags {
        let sched = policy.plan(dag, &mut timelines, seed)?;
        for (i, t) in dag.tasks().iter().enumerate() {
            tasks.push(TaskInfo {
                app: dag.id(),
                task: t.id,
                arrival: dag.arrival(),
                cost: t.cost,
                min_cost: t.min_cost,
                deadline: t.deadline.or(dag.deadline()),
            });
            for s in sched.copies(t.id) {
                let p = platform.index_of(s.processor).expect("planned on a platform processor");
                let speed = platform.processor(p).speed_factor;
                let parents = dag
                    .parents(i)
                    .iter()
                    .map(|&(q, comm)| ((dag.id(), dag.task(q).id), comm))
                    .collect();
                procs.push(p);
                planned.push((
                    s.start,
                    PlannedSlot {
                        app: dag.id(),
                        task: t.id,
                        amount: s.executed,
                        full_duration: s.executed.div_rate(speed),
                        frequency: s.frequency,
                        planned_finish: s.finish,
                        release: dag.release(i),
                        duplicate: s.duplicate,
                        parents,
                        acf: t.actual_cost_factor,
                        cost: t.cost,
                        min_cost: t.min_cost,
                    },
                ));
            }
        }
    }
    let queues = into_queues(platform.len(), procs, planned);
    Ok((plan_mode(queues), tasks))
}

fn build_bots(workload: &Workload, platform: &Platform, heuristic: BotHeuristic) -> Result<(Mode, Vec<TaskInfo>)> {
    let mut bots = workload.bots.clone();
    bots.sort_by_key(|b| (b.arrival, b.id));
    let mut tasks = Vec::new();
    let mut planned = Vec::new();
    let mut procs = Vec::new();
    let mut ready = vec![Time::ZERO; platform.len()];
    let mut cloud = CloudState::new(platform);
    for bot in &bots {
        bot.validate(platform.len())?;
        for t in &bot.tasks {
            tasks.push(TaskInfo {
                app: bot.id,
                task: t.id,
                arrival: bot.arrival,
                cost: t.cost,
                min_cost: t.min_cost,
                deadline: t.deadline,
            });
        }
        let mut slot = |i: usize, p: usize, finish: Time, frequency: f64, release: Time| {
            let t = &bot.tasks[i];
            procs.push(p);
            let start = finish - bot.etc[i][p].div_rate(frequency);
            planned.push((
                start,
                PlannedSlot {
                    app: bot.id,
                    task: t.id,
                    amount: t.cost,
                    full_duration: bot.etc[i][p],
                    frequency,
                    planned_finish: finish,
                    release,
                    duplicate: false,
                    parents: Vec::new(),
                    acf: t.actual_cost_factor,
                    cost: t.cost,
                    min_cost: t.min_cost,
                },
            ));
        };
        if heuristic == BotHeuristic::Caees {
            let mut order: Vec<usize> = (0..bot.tasks.len()).collect();
            order.sort_by_key(|&i| (bot.tasks[i].deadline.unwrap_or(Time::MAX), bot.tasks[i].id));
            for i in order {
                let t = &bot.tasks[i];
                let now = bot.arrival.max(t.release());
                let deadline = t.deadline.unwrap_or(Time::MAX);
                let choice = match caees_select(t.id, &cloud, &bot.etc[i], deadline, now) {
                    Ok(c) => c,
                    Err(Error::Infeasible(_)) => earliest_finish(&cloud, &bot.etc[i], now),
                    Err(e) => return Err(e),
                };
                cloud.commit(&choice);
                slot(i, choice.vm, choice.finish, choice.frequency, now);
            }
        } else {
            let mapping = map_from(bot, heuristic, ready.clone())?;
            for a in &mapping.assignments {
                let i = bot
                    .tasks
                    .iter()
                    .position(|t| t.id == a.task)
                    .expect("mapped task exists");
                ready[a.processor] = ready[a.processor].max(a.finish);
                slot(
                    i,
                    a.processor,
                    a.finish,
                    a.frequency,
                    bot.arrival.max(bot.tasks[i].release()),
                );
            }
        }
    }
    let queues = into_queues(platform.len(), procs, planned);
    Ok((plan_mode(queues), tasks))
}

/// Full-frequency placement with the earliest finish; ties to the lower VM.
fn earliest_finish(cloud: &CloudState, etc: &[Time], now: Time) -> CaeesChoice {
    (0..cloud.vms.len())
        .map(|vm| {
            let start = cloud.vms[vm].busy_until.max(now);
            let finish = start + etc[vm];
            CaeesChoice {
                vm,
                tier: Tier::D,
                frequency: 1.0,
                start,
                finish,
                energy: cloud.power.power(1.0) * etc[vm].as_f64(),
            }
        })
        .min_by_key(|c| (c.finish, c.vm))
        .expect("platforms have processors")
}

fn into_queues(n: usize, procs: Vec<usize>, planned: Vec<(Time, PlannedSlot)>) -> Vec<VecDeque<PlannedSlot>> {
    let mut per: Vec<Vec<(Time, PlannedSlot)>> = vec![Vec::new(); n];
    for (p, s) in procs.into_iter().zip(planned) {
        per[p].push(s);
    }
    per.into_iter()
        .map(|mut v| {
            v.sort_by_key(|(start, s)| (*start, s.app, s.task, s.duplicate));
            v.into_iter().map(|(_, s)| s).collect()
        })
        .collect()
}

fn plan_mode(queues: Vec<VecDeque<PlannedSlot>>) -> Mode {
    let n = queues.len();
    Mode::Plan {
        queues,
        copies: BTreeMap::new(),
        wake_at: vec![None; n],
    }
}

/// Runs the periodic set on the first processor over one hyperperiod and
/// records it as a trace.
fn run_periodic(workload: &Workload, platform: &Platform, energy: EnergyPolicy, mut trace: Trace) -> Result<Trace> {
    let p0 = platform.processor(0);
    let proc = PeriodicProcessor {
        id: p0.id,
        speed: p0.speed_factor,
        levels: p0.frequency_levels.clone(),
    };
    let sched = mfed_schedule(&workload.periodic, None, &proc, energy)?;
    trace.header.energy_horizon = Some(sched.horizon);

    // (time, order at that instant, kind)
    let mut evs: Vec<(Time, u8, u64, EventKind)> = Vec::new();
    let mut n: u64 = 0;
    let mut push = |evs: &mut Vec<_>, t: Time, rank: u8, k: EventKind| {
        n += 1;
        evs.push((t, rank, n, k));
    };
    let key = |task: AppId, job: u32| (task, TaskId(job));
    let mut last_slot: BTreeMap<(AppId, TaskId), usize> = BTreeMap::new();
    for (i, s) in sched.slots.iter().enumerate() {
        last_slot.insert(key(s.task, s.job), i);
    }
    let jobs: BTreeMap<(AppId, TaskId), _> = sched.jobs.iter().map(|j| (key(j.task, j.job), j)).collect();
    for j in &sched.jobs {
        let k = EventKind::Arrival {
            app: j.task,
            task: TaskId(j.job),
            cost: j.mandatory_cost + j.optional_cost,
            min_cost: j.mandatory_cost,
            deadline: Some(j.deadline),
        };
        push(&mut evs, j.release, 2, k);
        if !j.mandatory_met() || j.finish.is_none() {
            let k = EventKind::DeadlineReached {
                app: j.task,
                task: TaskId(j.job),
            };
            push(&mut evs, j.deadline, 1, k);
        }
    }
    let mut progress: BTreeMap<(AppId, TaskId), Time> = BTreeMap::new();
    for (i, s) in sched.slots.iter().enumerate() {
        let id = key(s.task, s.job);
        let done = progress.entry(id).or_insert(Time::ZERO);
        *done += s.work;
        let j = jobs[&id];
        let outcome = if last_slot[&id] != i {
            Outcome::Interrupted
        } else if !j.mandatory_met() {
            Outcome::Missed
        } else if *done >= j.mandatory_cost + j.optional_cost {
            Outcome::Completed
        } else {
            Outcome::Approximate
        };
        let start = EventKind::SlotStart {
            app: s.task,
            task: id.1,
            processor: s.processor,
            frequency: s.frequency,
            duplicate: false,
        };
        let finish = EventKind::SlotFinish {
            app: s.task,
            task: id.1,
            processor: s.processor,
            executed: *done,
            outcome,
            duplicate: false,
        };
        push(&mut evs, s.start, 3, start);
        push(&mut evs, s.finish, 0, finish);
    }
    evs.sort_by_key(|e| (e.0, e.1, e.2));
    for (t, _, _, k) in evs {
        trace.push(t, k);
    }
    Ok(trace)
}
