use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Time;

/// Fault injection and checkpointing settings of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaultConfig {
    /// Failure rate per time unit.
    pub lambda: f64,
    /// Checkpoint period; no checkpoints when absent.
    pub checkpoint_interval: Option<Time>,
    /// Time each checkpoint pauses its application.
    #[serde(default)]
    pub overhead: Time,
}

impl FaultConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("fault lambda must be a finite rate >= 0".into()));
        }
        if self.checkpoint_interval.is_some_and(|k| !k.is_positive()) {
            return Err(Error::InvalidConfig("checkpoint interval must be positive".into()));
        }
        if self.overhead.is_negative() {
            return Err(Error::InvalidConfig("checkpoint overhead must be >= 0".into()));
        }
        Ok(())
    }
}

/// Seeded Poisson failure process; it also picks failure victims.
pub struct FailureProcess {
    rng: ChaCha8Rng,
    gap: Option<Exp<f64>>,
}

impl FailureProcess {
    pub fn new(lambda: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        FailureProcess {
            rng,
            gap: (lambda > 0.0).then(|| Exp::new(lambda).expect("positive rate")),
        }
    }

    /// Next failure strictly after `t`, or `None` for a zero rate.
    pub fn next_after(&mut self, t: Time) -> Option<Time> {
        let exp = self.gap?;
        let d = Time::from_f64(exp.sample(&mut self.rng)).max(Time::RESOLUTION);
        Some(t + d)
    }

    /// Uniform index in `0..n`.
    pub fn pick(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// Failure times in `(0, horizon]` of a Poisson process with rate `lambda`.
pub fn inject_failures(lambda: f64, horizon: Time, seed: u64) -> Result<Vec<Time>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig("fault lambda must be a finite rate >= 0".into()));
    }
    let mut p = FailureProcess::new(lambda, seed);
    let mut out = Vec::new();
    let mut t = Time::ZERO;
    while let Some(next) = p.next_after(t) {
        if next > horizon {
            break;
        }
        out.push(next);
        t = next;
    }
    Ok(out)
}

/// Local checkpoints of the member tasks of one application. The global
/// checkpoint is the oldest local one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckpointState {
    /// Application start; checkpoints fall on `start + n * interval`.
    pub start: Time,
    /// Per member: time of the last local checkpoint and the executed
    /// amount saved there.
    pub local: Vec<(Time, Time)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollback {
    pub checkpoint: Time,
    pub restored: Vec<Time>,
    /// Progress discarded, summed over members.
    pub lost: Time,
}

impl CheckpointState {
    /// Nothing saved yet: a rollback restarts from scratch.
    pub fn new(start: Time, members: usize) -> Self {
        CheckpointState {
            start,
            local: vec![(start, Time::ZERO); members],
        }
    }

    pub fn record(&mut self, now: Time, executed: &[Time]) {
        for (l, &e) in self.local.iter_mut().zip(executed) {
            *l = (now, e);
        }
    }

    pub fn global(&self) -> Time {
        self.local.iter().map(|l| l.0).min().unwrap_or(self.start)
    }

    pub fn saved(&self) -> Vec<Time> {
        self.local.iter().map(|l| l.1).collect()
    }

    /// Whether a checkpoint falls due exactly at `t` and is not taken yet.
    pub fn due_at(&self, interval: Time, t: Time) -> bool {
        t > self.start && (t - self.start).ticks() % interval.ticks() == 0 && self.global() < t
    }
}

/// Rolls an application back after a failure at `failure`, given its
/// members' executed amounts at that instant. A checkpoint due exactly at
/// the failure instant is taken first.
pub fn checkpoint_and_rollback(
    state: &mut CheckpointState,
    interval: Time,
    failure: Time,
    executed_now: &[Time],
) -> Result<Rollback> {
    if !interval.is_positive() {
        return Err(Error::InvalidConfig("checkpoint interval must be positive".into()));
    }
    if state.due_at(interval, failure) {
        state.record(failure, executed_now);
    }
    let restored = state.saved();
    let lost = executed_now
        .iter()
        .zip(&restored)
        .map(|(&e, &r)| (e - r).max(Time::ZERO))
        .sum();
    Ok(Rollback {
        checkpoint: state.global(),
        restored,
        lost,
    })
}
