//! Batch mapping of bags of independent tasks onto heterogeneous processors,
//! and energy-aware virtual machine selection.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ProcId, TaskId};
use crate::platform::{Platform, PowerModel};
use crate::time::Time;
use crate::workload::BotApp;

/// One task-to-processor decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Assignment {
    pub task: TaskId,
    /// Processor index.
    pub processor: usize,
    pub start: Time,
    pub finish: Time,
    pub frequency: f64,
}

/// Per-processor ready times, unassigned tasks and the decisions so far.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingState {
    pub ready: Vec<Time>,
    pub unassigned: BTreeSet<usize>,
    pub log: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub assignments: Vec<Assignment>,
    pub makespan: Time,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BotHeuristic {
    MinMin,
    MaxMin,
    Sufferage,
    Caees,
}

pub const BOT_POLICIES: &str = "minmin | maxmin | sufferage | caees";

impl fmt::Display for BotHeuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BotHeuristic::MinMin => "minmin",
            BotHeuristic::MaxMin => "maxmin",
            BotHeuristic::Sufferage => "sufferage",
            BotHeuristic::Caees => "caees",
        })
    }
}

impl FromStr for BotHeuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "minmin" => BotHeuristic::MinMin,
            "maxmin" => BotHeuristic::MaxMin,
            "sufferage" => BotHeuristic::Sufferage,
            "caees" => BotHeuristic::Caees,
            _ => {
                return Err(Error::InvalidPolicy {
                    given: s.to_string(),
                    valid: BOT_POLICIES.to_string(),
                })
            }
        })
    }
}

impl MappingState {
    pub fn new(tasks: usize, ready: Vec<Time>) -> Self {
        MappingState {
            ready,
            unassigned: (0..tasks).collect(),
            log: Vec::new(),
        }
    }

    /// Completion time of task `i` on every processor given current loads.
    fn completions(&self, bot: &BotApp, i: usize) -> Vec<Time> {
        let release = bot.arrival.max(bot.tasks[i].release());
        self.ready
            .iter()
            .zip(&bot.etc[i])
            .map(|(&r, &e)| r.max(release) + e)
            .collect()
    }

    fn assign(&mut self, bot: &BotApp, i: usize, p: usize) {
        let finish = self.completions(bot, i)[p];
        let start = finish - bot.etc[i][p];
        self.ready[p] = finish;
        self.unassigned.remove(&i);
        self.log.push(Assignment {
            task: bot.tasks[i].id,
            processor: p,
            start,
            finish,
            frequency: 1.0,
        });
    }

    /// One iteration: picks a task by the heuristic's rule and assigns it to
    /// its minimum-completion-time processor.
    pub fn step(&mut self, bot: &BotApp, heuristic: BotHeuristic) -> Result<()> {
        // (task, mct processor, mct, second mct)
        let mut cands = Vec::with_capacity(self.unassigned.len());
        for &i in &self.unassigned {
            let c = self.completions(bot, i);
            let (p, mct) = c
                .iter()
                .copied()
                .enumerate()
                .min_by_key(|&(p, t)| (t, p))
                .expect("ETC rows are nonempty");
            let second = c
                .iter()
                .copied()
                .enumerate()
                .filter(|&(q, _)| q != p)
                .map(|(_, t)| t)
                .min();
            cands.push((i, p, mct, second));
        }
        let id = |i: usize| bot.tasks[i].id;
        let pick = match heuristic {
            BotHeuristic::MinMin => cands.iter().min_by_key(|c| (c.2, id(c.0))),
            BotHeuristic::MaxMin => cands.iter().min_by_key(|c| (-c.2.ticks(), id(c.0))),
            BotHeuristic::Sufferage => {
                if self.ready.len() < 2 {
                    return Err(Error::NeedTwoProcessors);
                }
                cands
                    .iter()
                    .min_by_key(|c| (-(c.3.expect("two processors") - c.2).ticks(), id(c.0)))
            }
            BotHeuristic::Caees => {
                return Err(Error::InvalidConfig("caees maps tasks through caees_select".into()));
            }
        };
        if let Some(&(i, p, _, _)) = pick {
            self.assign(bot, i, p);
        }
        Ok(())
    }
}

/// Maps every task of `bot` onto processors whose queues already end at
/// `ready`.
pub fn map_from(bot: &BotApp, heuristic: BotHeuristic, ready: Vec<Time>) -> Result<Mapping> {
    bot.validate(ready.len())?;
    if heuristic == BotHeuristic::Sufferage && ready.len() < 2 {
        return Err(Error::NeedTwoProcessors);
    }
    let mut st = MappingState::new(bot.tasks.len(), ready);
    while !st.unassigned.is_empty() {
        st.step(bot, heuristic)?;
    }
    let makespan = st.log.iter().map(|a| a.finish).max().unwrap_or(Time::ZERO);
    Ok(Mapping {
        assignments: st.log,
        makespan,
    })
}

/// Min-Min: the task with the smallest minimum completion time goes first.
pub fn min_min(bot: &BotApp, platform: &Platform) -> Result<Mapping> {
    map_from(bot, BotHeuristic::MinMin, vec![Time::ZERO; platform.len()])
}

/// Max-Min: the task with the largest minimum completion time goes first.
pub fn max_min(bot: &BotApp, platform: &Platform) -> Result<Mapping> {
    map_from(bot, BotHeuristic::MaxMin, vec![Time::ZERO; platform.len()])
}

/// Sufferage: the task losing most if denied its best processor goes first.
pub fn sufferage(bot: &BotApp, platform: &Platform) -> Result<Mapping> {
    map_from(bot, BotHeuristic::Sufferage, vec![Time::ZERO; platform.len()])
}

/// The four selection tiers, in order of preference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    /// A VM in use at its current frequency.
    A,
    /// A VM in use after raising its frequency.
    B,
    /// An idle VM on a host with another VM in use.
    C,
    /// An idle VM on an idle host.
    D,
}

/// State of one VM as seen by the selector.
#[derive(Clone, Debug, PartialEq)]
pub struct VmView {
    pub processor: ProcId,
    pub host: usize,
    /// Time its queue drains; the VM is in use while this is after `now`.
    pub busy_until: Time,
    pub frequency: f64,
    pub levels: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CloudState {
    pub vms: Vec<VmView>,
    pub power: PowerModel,
}

impl CloudState {
    /// All VMs idle at their lowest level.
    pub fn new(platform: &Platform) -> Self {
        let mut vms: Vec<VmView> = Vec::with_capacity(platform.len());
        for (h, host) in platform.hosts().iter().enumerate() {
            for vm in &host.vms {
                let p = platform.index_of(ProcId(vm.id.0)).expect("VMs name processors");
                vms.push(VmView {
                    processor: platform.processor(p).id,
                    host: h,
                    busy_until: Time::ZERO,
                    frequency: platform.processor(p).lowest_level(),
                    levels: platform.processor(p).frequency_levels.clone(),
                });
            }
        }
        vms.sort_by_key(|v| platform.index_of(v.processor));
        CloudState {
            vms,
            power: *platform.power_model(),
        }
    }

    pub fn in_use(&self, vm: usize, now: Time) -> bool {
        self.vms[vm].busy_until > now
    }

    pub fn host_idle(&self, host: usize, now: Time) -> bool {
        (0..self.vms.len()).all(|v| self.vms[v].host != host || !self.in_use(v, now))
    }

    /// Records `choice` on the chosen VM.
    pub fn commit(&mut self, choice: &CaeesChoice) {
        let v = &mut self.vms[choice.vm];
        v.busy_until = choice.finish;
        v.frequency = choice.frequency;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaeesChoice {
    /// VM (= processor) index.
    pub vm: usize,
    pub tier: Tier,
    pub frequency: f64,
    pub start: Time,
    pub finish: Time,
    /// Energy of running the task there.
    pub energy: f64,
}

/// Feasible options of one VM for a task: `(tier, frequency, start, finish)`.
fn vm_options(cloud: &CloudState, vm: usize, etc: Time, deadline: Time, now: Time) -> Vec<(Tier, f64, Time, Time)> {
    let v = &cloud.vms[vm];
    let start = v.busy_until.max(now);
    let fits = |f: f64| start + etc.div_rate(f) <= deadline;
    if cloud.in_use(vm, now) {
        if fits(v.frequency) {
            return vec![(Tier::A, v.frequency, start, start + etc.div_rate(v.frequency))];
        }
        v.levels
            .iter()
            .copied()
            .filter(|&f| f > v.frequency && fits(f))
            .take(1)
            .map(|f| (Tier::B, f, start, start + etc.div_rate(f)))
            .collect()
    } else {
        let tier = if cloud.host_idle(v.host, now) { Tier::D } else { Tier::C };
        v.levels
            .iter()
            .copied()
            .filter(|&f| fits(f))
            .take(1)
            .map(|f| (tier, f, start, start + etc.div_rate(f)))
            .collect()
    }
}

/// Every tier that admits the task on some VM.
pub fn caees_feasible_tiers(cloud: &CloudState, etc: &[Time], deadline: Time, now: Time) -> BTreeSet<Tier> {
    (0..cloud.vms.len())
        .flat_map(|v| vm_options(cloud, v, etc[v], deadline, now))
        .map(|o| o.0)
        .collect()
}

/// Chooses a VM and frequency for a task with per-VM execution times `etc`
/// (at full frequency) and the given deadline. The earliest feasible tier
/// wins; within it the option with the least energy, then the lowest VM
/// index.
pub fn caees_select(task: TaskId, cloud: &CloudState, etc: &[Time], deadline: Time, now: Time) -> Result<CaeesChoice> {
    let mut best: Option<CaeesChoice> = None;
    for vm in 0..cloud.vms.len() {
        for (tier, f, start, finish) in vm_options(cloud, vm, etc[vm], deadline, now) {
            let energy = cloud.power.power(f) * (finish - start).as_f64();
            let better = match &best {
                None => true,
                Some(b) => (tier, energy) < (b.tier, b.energy),
            };
            if better {
                best = Some(CaeesChoice {
                    vm,
                    tier,
                    frequency: f,
                    start,
                    finish,
                    energy,
                });
            }
        }
    }
    best.ok_or(Error::Infeasible(task))
}
