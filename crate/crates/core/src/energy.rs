//! Dynamic voltage and frequency scaling: slack reclamation after early
//! completions, and mandatory-first EDF scheduling of periodic imprecise
//! tasks with cycle-conserving frequency selection.
//!
//! Frequency level lists are ascending ratios ending at 1. An empty list
//! means any ratio in (0, 1] is available.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AppId, ProcId, TaskId};
use crate::platform::level_at_least;
use crate::time::Time;
use crate::workload::PeriodicTask;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyPolicy {
    #[default]
    None,
    SlackReclaim,
    MfedCcrt,
}

pub const ENERGY_POLICIES: &str = "none | slack-reclaim | mfed-ccrt";

impl fmt::Display for EnergyPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyPolicy::None => "none",
            EnergyPolicy::SlackReclaim => "slack-reclaim",
            EnergyPolicy::MfedCcrt => "mfed-ccrt",
        })
    }
}

impl FromStr for EnergyPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => EnergyPolicy::None,
            "slack-reclaim" => EnergyPolicy::SlackReclaim,
            "mfed-ccrt" => EnergyPolicy::MfedCcrt,
            _ => {
                return Err(Error::InvalidPolicy {
                    given: s.to_string(),
                    valid: ENERGY_POLICIES.to_string(),
                })
            }
        })
    }
}

/// Smallest available level at least `ratio`; with no levels, `ratio`
/// itself clamped to (0, 1].
pub fn select_level(levels: &[f64], ratio: f64) -> f64 {
    if levels.is_empty() {
        if ratio.is_finite() && ratio > 0.0 {
            ratio.min(1.0)
        } else {
            1.0
        }
    } else {
        level_at_least(levels, ratio)
    }
}

/// Where a unit of slack came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlackRecord {
    pub app: AppId,
    pub task: TaskId,
    pub worst_case: Time,
    pub actual: Time,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct ProcSlack {
    available: Time,
    generated: Time,
    spent: Time,
    expired: Time,
    records: Vec<SlackRecord>,
}

/// Per-processor slack bookkeeping. At all times
/// `generated = spent + available + expired`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackLedger {
    procs: Vec<ProcSlack>,
}

impl SlackLedger {
    pub fn new(processors: usize) -> Self {
        SlackLedger {
            procs: vec![ProcSlack::default(); processors],
        }
    }

    /// Credits `worst_case - actual` (if positive) to processor `p`.
    pub fn credit(&mut self, p: usize, record: SlackRecord) {
        let s = (record.worst_case - record.actual).max(Time::ZERO);
        let e = &mut self.procs[p];
        e.available += s;
        e.generated += s;
        e.records.push(record);
    }

    /// Removes up to `amount` from the available slack of `p` and returns
    /// what was actually taken.
    pub fn spend(&mut self, p: usize, amount: Time) -> Time {
        let e = &mut self.procs[p];
        let take = amount.max(Time::ZERO).min(e.available);
        e.available -= take;
        e.spent += take;
        take
    }

    /// Discards all available slack of `p`.
    pub fn expire(&mut self, p: usize) {
        let e = &mut self.procs[p];
        e.expired += e.available;
        e.available = Time::ZERO;
    }

    pub fn available(&self, p: usize) -> Time {
        self.procs[p].available
    }

    pub fn generated(&self, p: usize) -> Time {
        self.procs[p].generated
    }

    pub fn spent(&self, p: usize) -> Time {
        self.procs[p].spent
    }

    pub fn expired(&self, p: usize) -> Time {
        self.procs[p].expired
    }

    pub fn records(&self, p: usize) -> &[SlackRecord] {
        &self.procs[p].records
    }
}

/// Frequency for a task whose worst-case duration at full speed is `d`,
/// given slack `s` and at most `window` of time before it must finish.
pub fn stretch_ratio(d: Time, s: Time, window: Option<Time>, levels: &[f64]) -> f64 {
    if !d.is_positive() {
        return 1.0;
    }
    let mut ratio = d.as_f64() / (d + s.max(Time::ZERO)).as_f64();
    if let Some(w) = window {
        ratio = if w.is_positive() {
            ratio.max(d.as_f64() / w.as_f64())
        } else {
            1.0
        };
    }
    select_level(levels, ratio)
}

/// Picks the frequency for the next task on processor `p`: the smallest
/// level `f >= d / (d + s)` that also keeps `d / f` within `window`, then
/// deducts the stretch `d / f - d` from the ledger.
pub fn reclaim_slack(ledger: &mut SlackLedger, p: usize, d: Time, window: Option<Time>, levels: &[f64]) -> f64 {
    let s = ledger.available(p);
    if !s.is_positive() {
        return 1.0;
    }
    let f = stretch_ratio(d, s, window, levels);
    ledger.spend(p, d.div_rate(f) - d);
    f
}

/// Frequency for the optional part of a job after its mandatory part freed
/// `slack`. `optional` is the optional duration at full speed, `base` the
/// frequency the job was released at and `to_deadline` the time left.
pub fn cc_rt_dvfs_update(optional: Time, slack: Time, base: f64, to_deadline: Time, levels: &[f64]) -> f64 {
    if !optional.is_positive() {
        return base;
    }
    let planned = optional.div_rate(base);
    let mut ratio = optional.as_f64() / (planned + slack.max(Time::ZERO)).as_f64();
    ratio = if to_deadline.is_positive() {
        ratio.max(optional.as_f64() / to_deadline.as_f64())
    } else {
        1.0
    };
    select_level(levels, ratio)
}

/// Frequency every release of the set starts at: total worst-case
/// utilization rounded up to a level.
pub fn utilization_level(tasks: &[PeriodicTask], speed: f64, levels: &[f64]) -> f64 {
    let u: f64 = tasks
        .iter()
        .map(|t| (t.mandatory_cost + t.optional_cost).as_f64() / t.period.as_f64())
        .sum();
    select_level(levels, u / speed)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple of the periods.
pub fn hyperperiod(tasks: &[PeriodicTask]) -> Time {
    if tasks.is_empty() {
        return Time::ZERO;
    }
    let l = tasks
        .iter()
        .map(|t| t.period.ticks())
        .fold(1i64, |acc, p| acc / gcd(acc, p) * p);
    Time::from_ticks(l)
}

/// One execution interval of a periodic job.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PeriodicSlot {
    pub task: AppId,
    pub job: u32,
    pub processor: ProcId,
    pub start: Time,
    pub finish: Time,
    /// Nominal work done in this interval.
    pub work: Time,
    pub frequency: f64,
    pub mandatory: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobRecord {
    pub task: AppId,
    pub job: u32,
    pub release: Time,
    pub deadline: Time,
    pub mandatory_cost: Time,
    pub optional_cost: Time,
    /// Time the mandatory part completed, if it did by the deadline.
    pub mandatory_finish: Option<Time>,
    /// Mandatory work (nominal) plus optional work done.
    pub executed: Time,
    /// End of the job's last execution interval.
    pub finish: Option<Time>,
    pub first_start: Option<Time>,
}

impl JobRecord {
    pub fn mandatory_met(&self) -> bool {
        self.mandatory_finish.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSchedule {
    pub slots: Vec<PeriodicSlot>,
    pub jobs: Vec<JobRecord>,
    pub horizon: Time,
    pub ledger: SlackLedger,
}

/// Processor the periodic set runs on.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicProcessor {
    pub id: ProcId,
    pub speed: f64,
    pub levels: Vec<f64>,
}

impl Default for PeriodicProcessor {
    fn default() -> Self {
        PeriodicProcessor {
            id: ProcId(0),
            speed: 1.0,
            levels: Vec::new(),
        }
    }
}

struct Job {
    rec: JobRecord,
    idx: usize,
    /// Remaining mandatory work, nominal units.
    mand_left: Time,
    opt_left: Time,
    acf: f64,
    /// Own slack freed by the mandatory part (CC-RT-DVFS).
    slack: Time,
}

impl Job {
    fn mandatory_pending(&self) -> bool {
        self.mand_left.is_positive()
    }
}

/// Preemptive mandatory-first EDF over `[0, horizon)` (default: one
/// hyperperiod). Pending mandatory parts always run before optional parts;
/// each class is served in deadline order, ties by task order then release.
/// Parts are dropped when their job's deadline passes.
pub fn mfed_schedule(
    tasks: &[PeriodicTask],
    horizon: Option<Time>,
    processor: &PeriodicProcessor,
    policy: EnergyPolicy,
) -> Result<PeriodicSchedule> {
    for t in tasks {
        t.validate()?;
    }
    let mand_util: f64 = tasks
        .iter()
        .map(|t| t.mandatory_cost.as_f64() / t.period.as_f64())
        .sum();
    if mand_util > processor.speed + 1e-12 {
        return Err(Error::MandatoryOverload(mand_util));
    }
    let horizon = horizon.unwrap_or_else(|| hyperperiod(tasks));
    let levels = &processor.levels;
    let s = processor.speed;
    let base = match policy {
        EnergyPolicy::MfedCcrt => utilization_level(tasks, s, levels),
        _ => 1.0,
    };

    let mut jobs: Vec<Job> = Vec::new();
    for (idx, t) in tasks.iter().enumerate() {
        let mut k = 0u32;
        while t.period * (k as i64) < horizon {
            let release = t.period * (k as i64);
            jobs.push(Job {
                rec: JobRecord {
                    task: t.id,
                    job: k,
                    release,
                    deadline: release + t.period,
                    mandatory_cost: t.mandatory_cost,
                    optional_cost: t.optional_cost,
                    mandatory_finish: None,
                    executed: Time::ZERO,
                    finish: None,
                    first_start: None,
                },
                idx,
                mand_left: t.mandatory_cost,
                opt_left: t.optional_cost,
                acf: t.actual_cost_factor,
                slack: Time::ZERO,
            });
            k += 1;
        }
    }
    let mut releases: Vec<Time> = jobs.iter().map(|j| j.rec.release).collect();
    releases.sort();
    releases.dedup();

    let mut ledger = SlackLedger::new(1);
    let mut slots: Vec<PeriodicSlot> = Vec::new();
    let mut now = Time::ZERO;
    let end = jobs
        .iter()
        .map(|j| j.rec.deadline)
        .max()
        .unwrap_or(Time::ZERO)
        .max(horizon);

    while now < end {
        let live = |j: &Job| j.rec.release <= now && now < j.rec.deadline;
        let pick = jobs
            .iter()
            .enumerate()
            .filter(|(_, j)| live(j) && j.mandatory_pending())
            .min_by_key(|(_, j)| (j.rec.deadline, j.idx, j.rec.release))
            .map(|(i, _)| (i, true))
            .or_else(|| {
                jobs.iter()
                    .enumerate()
                    .filter(|(_, j)| live(j) && !j.mandatory_pending() && j.opt_left.is_positive())
                    .min_by_key(|(_, j)| (j.rec.deadline, j.idx, j.rec.release))
                    .map(|(i, _)| (i, false))
            });
        let next_release = releases.iter().copied().find(|&r| r > now);
        let Some((ji, mandatory)) = pick else {
            ledger.expire(0);
            match next_release {
                Some(r) => {
                    now = r;
                    continue;
                }
                None => break,
            }
        };

        let job = &jobs[ji];
        let to_deadline = job.rec.deadline - now;
        // work per unit time and the frequency of this interval
        let (f, rate) = if mandatory {
            (base, s * base / job.acf)
        } else {
            let d = job.opt_left.div_rate(s);
            let f = match policy {
                EnergyPolicy::None => 1.0,
                EnergyPolicy::SlackReclaim => stretch_ratio(d, ledger.available(0), Some(to_deadline), levels),
                EnergyPolicy::MfedCcrt => cc_rt_dvfs_update(d, job.slack, base, to_deadline, levels),
            };
            (f, s * f)
        };
        let left = if mandatory { job.mand_left } else { job.opt_left };
        let done_at = now + left.div_rate(rate);
        let stop = [Some(done_at), next_release, Some(job.rec.deadline)]
            .into_iter()
            .flatten()
            .min()
            .expect("nonempty");
        let elapsed = stop - now;
        let work = if stop == done_at {
            left
        } else {
            elapsed.scale(rate).min(left)
        };

        let job = &mut jobs[ji];
        if job.rec.first_start.is_none() {
            job.rec.first_start = Some(now);
        }
        slots.push(PeriodicSlot {
            task: job.rec.task,
            job: job.rec.job,
            processor: processor.id,
            start: now,
            finish: stop,
            work,
            frequency: f,
            mandatory,
        });
        job.rec.finish = Some(stop);
        job.rec.executed += work;
        if mandatory {
            job.mand_left -= work;
            if !job.mand_left.is_positive() {
                job.rec.mandatory_finish = Some(stop);
                let worst = job.rec.mandatory_cost.div_rate(s * base);
                let actual = job.rec.mandatory_cost.scale(job.acf).div_rate(s * base);
                let record = SlackRecord {
                    app: job.rec.task,
                    task: TaskId(job.rec.job),
                    worst_case: worst,
                    actual,
                };
                match policy {
                    EnergyPolicy::SlackReclaim => ledger.credit(0, record),
                    EnergyPolicy::MfedCcrt => job.slack = (worst - actual).max(Time::ZERO),
                    EnergyPolicy::None => {}
                }
            }
        } else {
            job.opt_left -= work;
            if policy == EnergyPolicy::SlackReclaim {
                // stretch consumed beyond the full-speed duration of this work
                ledger.spend(0, elapsed - work.div_rate(s));
            }
            if policy == EnergyPolicy::MfedCcrt {
                let used = elapsed - work.div_rate(s * base);
                job.slack = (job.slack - used).max(Time::ZERO);
            }
        }
        now = stop;
    }

    Ok(PeriodicSchedule {
        slots,
        jobs: jobs.into_iter().map(|j| j.rec).collect(),
        horizon,
        ledger,
    })
}
