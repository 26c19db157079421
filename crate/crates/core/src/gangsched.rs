//! Gang scheduling over per-processor queues: adaptive first-come
//! first-served with backfilling, bypass counting and migrations, largest
//! gang first served, and EDF combined with approximate computations.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ids::{AppId, TaskId};
use crate::platform::Platform;
use crate::time::Time;
use crate::workload::Gang;

/// A gang that has arrived and not started yet.
#[derive(Clone, Debug, PartialEq)]
pub struct WaitingGang {
    pub id: AppId,
    pub arrival: Time,
    pub deadline: Option<Time>,
    /// Member task and the processor queue it waits in.
    pub members: Vec<(TaskId, usize)>,
    pub bypass: u32,
}

impl WaitingGang {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// A gang chosen to start now on the listed processors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dispatch {
    pub gang: AppId,
    pub members: Vec<(TaskId, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Migration {
    pub gang: AppId,
    pub task: TaskId,
    pub from: usize,
    pub to: usize,
}

/// Queues, counters and processor occupancy of the gang scheduler.
#[derive(Clone, Debug, PartialEq)]
pub struct GangDispatchState {
    queues: Vec<VecDeque<(AppId, TaskId)>>,
    running: Vec<Option<AppId>>,
    waiting: BTreeMap<AppId, WaitingGang>,
    accepted_migrations: Vec<u32>,
    /// `None` disables saturation.
    pub bypass_threshold: Option<u32>,
    /// `None` disables migration.
    pub migration_limit: Option<u32>,
    pub backfill: bool,
}

impl GangDispatchState {
    pub fn new(processors: usize) -> Self {
        GangDispatchState {
            queues: vec![VecDeque::new(); processors],
            running: vec![None; processors],
            waiting: BTreeMap::new(),
            accepted_migrations: vec![0; processors],
            bypass_threshold: None,
            migration_limit: None,
            backfill: true,
        }
    }

    pub fn processors(&self) -> usize {
        self.queues.len()
    }

    /// Waiting members plus the running one, if any.
    pub fn queue_len(&self, p: usize) -> usize {
        self.queues[p].len() + usize::from(self.running[p].is_some())
    }

    pub fn queue(&self, p: usize) -> impl Iterator<Item = &(AppId, TaskId)> {
        self.queues[p].iter()
    }

    pub fn is_idle(&self, p: usize) -> bool {
        self.running[p].is_none()
    }

    pub fn idle(&self) -> Vec<usize> {
        (0..self.processors()).filter(|&p| self.is_idle(p)).collect()
    }

    pub fn running_on(&self, p: usize) -> Option<AppId> {
        self.running[p]
    }

    pub fn waiting(&self) -> impl Iterator<Item = &WaitingGang> {
        self.waiting.values()
    }

    pub fn waiting_gang(&self, id: AppId) -> Option<&WaitingGang> {
        self.waiting.get(&id)
    }

    pub fn accepted_migrations(&self, p: usize) -> u32 {
        self.accepted_migrations[p]
    }

    pub fn is_saturated(&self, g: &WaitingGang) -> bool {
        self.bypass_threshold.is_some_and(|t| g.bypass >= t)
    }

    /// Queues every member of `gang`: at its explicit placement if it has
    /// one, else on the shortest queues (ties to the lower index).
    pub fn admit(&mut self, gang: &Gang, platform: &Platform) -> Result<()> {
        let n = self.processors();
        if gang.size() > n {
            return Err(Error::GangTooLarge {
                gang: gang.id,
                size: gang.size(),
                available: n,
            });
        }
        let procs: Vec<usize> = match &gang.placement {
            Some(pl) => pl
                .iter()
                .map(|&id| {
                    platform
                        .index_of(id)
                        .ok_or_else(|| Error::InvalidConfig(format!("gang {} placed on unknown {id}", gang.id)))
                })
                .collect::<Result<_>>()?,
            None => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&p| (self.queue_len(p), p));
                order.truncate(gang.size());
                order
            }
        };
        let members: Vec<(TaskId, usize)> = gang.tasks.iter().map(|t| t.id).zip(procs).collect();
        for &(t, p) in &members {
            self.queues[p].push_back((gang.id, t));
        }
        self.waiting.insert(
            gang.id,
            WaitingGang {
                id: gang.id,
                arrival: gang.arrival,
                deadline: gang.deadline(),
                members,
                bypass: 0,
            },
        );
        Ok(())
    }

    fn startable(&self, g: &WaitingGang, claimed: &[bool]) -> bool {
        g.members.iter().all(|&(_, p)| self.is_idle(p) && !claimed[p])
    }

    fn start(&mut self, id: AppId) -> Dispatch {
        let g = self.waiting.remove(&id).expect("waiting gang");
        for &(t, p) in &g.members {
            self.queues[p].retain(|&(a, x)| !(a == id && x == t));
            self.running[p] = Some(id);
        }
        Dispatch {
            gang: id,
            members: g.members,
        }
    }

    /// Frees the processors of a finished or terminated gang.
    pub fn release(&mut self, id: AppId) {
        for r in &mut self.running {
            if *r == Some(id) {
                *r = None;
            }
        }
    }

    /// Walks waiting gangs in `order`, starting each one whose processors
    /// are all idle. A blocked gang for which `stop` holds ends the walk.
    /// Returns the started gangs and, for each, the gangs it overtook.
    fn dispatch_in_order(
        &mut self,
        order: Vec<AppId>,
        stop: impl Fn(&Self, &WaitingGang) -> bool,
    ) -> (Vec<Dispatch>, Vec<(AppId, Vec<AppId>)>) {
        let mut claimed = vec![false; self.processors()];
        let mut chosen = Vec::new();
        let mut blocked = Vec::new();
        let mut overtakes = Vec::new();
        for id in order {
            let g = &self.waiting[&id];
            if self.startable(g, &claimed) {
                for &(_, p) in &g.members {
                    claimed[p] = true;
                }
                overtakes.push((id, blocked.clone()));
                chosen.push(id);
            } else {
                blocked.push(id);
                if stop(self, g) {
                    break;
                }
            }
        }
        (chosen.into_iter().map(|id| self.start(id)).collect(), overtakes)
    }

    fn ordered_by<K: Ord>(&self, key: impl Fn(&WaitingGang) -> K) -> Vec<AppId> {
        let mut v: Vec<&WaitingGang> = self.waiting.values().collect();
        v.sort_by_key(|g| key(g));
        v.into_iter().map(|g| g.id).collect()
    }
}

/// Adaptive FCFS: saturated gangs first, then arrival order, then id. With
/// backfilling, a gang that cannot start lets later gangs try; a saturated
/// gang that cannot start ends the walk. Gangs overtaken in this decision
/// have their bypass count raised once.
pub fn afcfs_dispatch(state: &mut GangDispatchState, _now: Time) -> Vec<Dispatch> {
    let order = state.ordered_by(|g| (!state.is_saturated(g), g.arrival, g.id));
    let backfill = state.backfill;
    let (started, overtakes) = state.dispatch_in_order(order, |s, g| !backfill || s.is_saturated(g));
    let mut bumped: Vec<AppId> = Vec::new();
    for (by, blocked) in overtakes {
        for b in blocked {
            if !bumped.contains(&b) {
                afcfs_bypass_update(state, b, by);
                bumped.push(b);
            }
        }
    }
    started
}

/// Records that `dispatched` overtook `blocked`.
pub fn afcfs_bypass_update(state: &mut GangDispatchState, blocked: AppId, dispatched: AppId) {
    if blocked == dispatched {
        return;
    }
    if let Some(g) = state.waiting.get_mut(&blocked) {
        g.bypass += 1;
    }
}

/// Moves members of blocked gangs to idle processors. A gang is a
/// candidate if one of its members heads the queue of an idle processor;
/// it migrates only if every member waiting on a busy processor can move to
/// a distinct idle processor whose queue is under the migration limit.
/// Moved members go to the head of their new queues.
pub fn afcfs_migrate(state: &mut GangDispatchState) -> Vec<Migration> {
    let Some(limit) = state.migration_limit else {
        return Vec::new();
    };
    let order = state.ordered_by(|g| (!state.is_saturated(g), g.arrival, g.id));
    let mut moves = Vec::new();
    for id in order {
        let g = &state.waiting[&id];
        let candidate = g
            .members
            .iter()
            .any(|&(t, p)| state.is_idle(p) && state.queues[p].front() == Some(&(id, t)));
        let stuck: Vec<(usize, TaskId, usize)> = g
            .members
            .iter()
            .enumerate()
            .filter(|&(_, &(_, p))| !state.is_idle(p))
            .map(|(k, &(t, p))| (k, t, p))
            .collect();
        if !candidate || stuck.is_empty() {
            continue;
        }
        let own: Vec<usize> = g.members.iter().map(|&(_, p)| p).collect();
        let targets: Vec<usize> = (0..state.processors())
            .filter(|&q| state.is_idle(q) && !own.contains(&q) && state.accepted_migrations[q] < limit)
            .take(stuck.len())
            .collect();
        if targets.len() < stuck.len() {
            continue;
        }
        for (&(k, t, from), &to) in stuck.iter().zip(&targets) {
            state.queues[from].retain(|&x| x != (id, t));
            state.queues[to].push_front((id, t));
            state.accepted_migrations[to] += 1;
            state.waiting.get_mut(&id).expect("waiting").members[k].1 = to;
            moves.push(Migration {
                gang: id,
                task: t,
                from,
                to,
            });
        }
    }
    moves
}

/// Largest gang first: size descending, then arrival, then id; every gang
/// whose processors are idle starts, in that order.
pub fn lgfs_dispatch(state: &mut GangDispatchState, _now: Time) -> Vec<Dispatch> {
    let order = state.ordered_by(|g| (std::cmp::Reverse(g.size()), g.arrival, g.id));
    state.dispatch_in_order(order, |_, _| false).0
}

/// Earliest deadline first over whole gangs, with backfilling.
pub fn edf_gang_dispatch(state: &mut GangDispatchState, _now: Time) -> Vec<Dispatch> {
    let order = state.ordered_by(|g| (g.deadline, g.arrival, g.id));
    let backfill = state.backfill;
    state.dispatch_in_order(order, |_, _| !backfill).0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcMode {
    /// Run to completion; end early only at the deadline, after a failure
    /// whose checkpoint covers the mandatory part, or to make room for a
    /// gang that must start now.
    Restricted,
    /// Run only the mandatory part of every member.
    Holistic,
}

/// EDF gang scheduling with approximate computations and checkpointing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdfGangAc {
    pub mode: AcMode,
    pub checkpoint_interval: Option<Time>,
}

impl EdfGangAc {
    /// Work each member executes when not terminated early.
    pub fn target(&self, cost: Time, min_cost: Time) -> Time {
        match self.mode {
            AcMode::Holistic => min_cost,
            AcMode::Restricted => cost,
        }
    }

    /// Condition (a): at its deadline a gang ends if every member has done
    /// its mandatory part.
    pub fn ends_at_deadline(&self, executed: &[Time], min_costs: &[Time]) -> bool {
        self.mode == AcMode::Restricted && covers(executed, min_costs)
    }

    /// Condition (b): after a failure a gang ends if its last checkpoint
    /// holds at least the mandatory part of every member.
    pub fn ends_after_failure(&self, checkpointed: &[Time], min_costs: &[Time]) -> bool {
        self.mode == AcMode::Restricted && self.checkpoint_interval.is_some() && covers(checkpointed, min_costs)
    }

    /// Condition (c): a running gang yields to one that must start now if
    /// it has done its mandatory part.
    pub fn yields(&self, executed: &[Time], min_costs: &[Time]) -> bool {
        self.mode == AcMode::Restricted && covers(executed, min_costs)
    }
}

fn covers(executed: &[Time], min_costs: &[Time]) -> bool {
    executed.iter().zip(min_costs).all(|(e, m)| e >= m)
}

/// Builds the EDF-gang policy; every gang must carry a deadline.
pub fn edf_gang_ac(gangs: &[Gang], mode: AcMode, checkpoint_interval: Option<Time>) -> Result<EdfGangAc> {
    for g in gangs {
        if g.deadline().is_none() {
            let t = g
                .tasks
                .iter()
                .find(|t| t.deadline.is_none())
                .map_or(TaskId(0), |t| t.id);
            return Err(Error::NoDeadline(t));
        }
    }
    Ok(EdfGangAc {
        mode,
        checkpoint_interval,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GangPolicy {
    Afcfs {
        bypass: Option<u32>,
        migrate: Option<u32>,
        backfill: bool,
    },
    Lgfs,
    EdfGangAc(AcMode),
}

pub const GANG_POLICIES: &str = "afcfs[+bypass:T][+migrate:L][+nobackfill] | lgfs | edf-gang-ac:restricted|holistic";

impl fmt::Display for GangPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GangPolicy::Afcfs {
                bypass,
                migrate,
                backfill,
            } => {
                write!(f, "afcfs")?;
                if let Some(t) = bypass {
                    write!(f, "+bypass:{t}")?;
                }
                if let Some(l) = migrate {
                    write!(f, "+migrate:{l}")?;
                }
                if !backfill {
                    write!(f, "+nobackfill")?;
                }
                Ok(())
            }
            GangPolicy::Lgfs => write!(f, "lgfs"),
            GangPolicy::EdfGangAc(AcMode::Restricted) => write!(f, "edf-gang-ac:restricted"),
            GangPolicy::EdfGangAc(AcMode::Holistic) => write!(f, "edf-gang-ac:holistic"),
        }
    }
}

impl FromStr for GangPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::InvalidPolicy {
            given: s.to_string(),
            valid: GANG_POLICIES.to_string(),
        };
        match s {
            "lgfs" => return Ok(GangPolicy::Lgfs),
            "edf-gang-ac:restricted" => return Ok(GangPolicy::EdfGangAc(AcMode::Restricted)),
            "edf-gang-ac:holistic" => return Ok(GangPolicy::EdfGangAc(AcMode::Holistic)),
            _ => {}
        }
        let mut parts = s.split('+');
        if parts.next() != Some("afcfs") {
            return Err(err());
        }
        let (mut bypass, mut migrate, mut backfill) = (None, None, true);
        for part in parts {
            match part.split_once(':') {
                Some(("bypass", v)) if bypass.is_none() => bypass = Some(v.parse().map_err(|_| err())?),
                Some(("migrate", v)) if migrate.is_none() => migrate = Some(v.parse().map_err(|_| err())?),
                None if part == "nobackfill" && backfill => backfill = false,
                _ => return Err(err()),
            }
        }
        Ok(GangPolicy::Afcfs {
            bypass,
            migrate,
            backfill,
        })
    }
}

impl GangPolicy {
    pub fn configure(&self, state: &mut GangDispatchState) {
        if let GangPolicy::Afcfs {
            bypass,
            migrate,
            backfill,
        } = *self
        {
            state.bypass_threshold = bypass;
            state.migration_limit = migrate;
            state.backfill = backfill;
        }
    }

    pub fn dispatch(&self, state: &mut GangDispatchState, now: Time) -> (Vec<Migration>, Vec<Dispatch>) {
        match self {
            GangPolicy::Afcfs { .. } => {
                let m = afcfs_migrate(state);
                (m, afcfs_dispatch(state, now))
            }
            GangPolicy::Lgfs => (Vec::new(), lgfs_dispatch(state, now)),
            GangPolicy::EdfGangAc(_) => (Vec::new(), edf_gang_dispatch(state, now)),
        }
    }
}
