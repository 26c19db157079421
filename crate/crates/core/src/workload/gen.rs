//! Seeded synthetic workload generators.
//!
//! Every generator is a pure function of its spec and seed. Generator specs
//! have a compact string form used by the CLI, e.g.
//! `dag:count=4,layers=3,fanout=2,ccr=1.5,cost=uniform:1:10,slack=2`.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::AppId;
use crate::time::Time;

use super::{critical_path, validate_dag, BotApp, DagApp, Edge, Gang, Task};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidDistributionParams(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum CostDistribution {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { mean: f64 },
}

impl CostDistribution {
    fn check(&self) -> Result<()> {
        match *self {
            CostDistribution::Constant { value } if value > 0.0 && value.is_finite() => Ok(()),
            CostDistribution::Uniform { low, high } if low > 0.0 && high >= low && high.is_finite() => Ok(()),
            CostDistribution::Exponential { mean } if mean > 0.0 && mean.is_finite() => Ok(()),
            other => Err(bad(format!("{other:?}: costs must be positive and finite"))),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Time {
        let v = match *self {
            CostDistribution::Constant { value } => value,
            CostDistribution::Uniform { low, high } => {
                if high > low {
                    rng.gen_range(low..high)
                } else {
                    low
                }
            }
            CostDistribution::Exponential { mean } => Exp::new(1.0 / mean).expect("checked").sample(rng),
        };
        Time::from_f64(v).max(Time::RESOLUTION)
    }

    fn mean(&self) -> f64 {
        match *self {
            CostDistribution::Constant { value } => value,
            CostDistribution::Uniform { low, high } => (low + high) / 2.0,
            CostDistribution::Exponential { mean } => mean,
        }
    }
}

impl FromStr for CostDistribution {
    type Err = Error;

    /// `const:V`, `uniform:LO:HI` or `exp:MEAN`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad(format!("bad cost distribution {s:?}")))
        };
        let d = match parts[0] {
            "const" | "constant" => CostDistribution::Constant { value: num(1)? },
            "uniform" => CostDistribution::Uniform {
                low: num(1)?,
                high: num(2)?,
            },
            "exp" | "exponential" => CostDistribution::Exponential { mean: num(1)? },
            _ => return Err(bad(format!("unknown cost distribution {s:?}"))),
        };
        d.check()?;
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SizeDistribution {
    Constant { value: usize },
    Uniform { low: usize, high: usize },
}

impl SizeDistribution {
    fn check(&self) -> Result<()> {
        match *self {
            SizeDistribution::Constant { value } if value >= 1 => Ok(()),
            SizeDistribution::Uniform { low, high } if low >= 1 && high >= low => Ok(()),
            other => Err(bad(format!("{other:?}: sizes must be >= 1"))),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        match *self {
            SizeDistribution::Constant { value } => value,
            SizeDistribution::Uniform { low, high } => rng.gen_range(low..=high),
        }
    }
}

impl FromStr for SizeDistribution {
    type Err = Error;

    /// `const:N` or `uniform:LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad(format!("bad size distribution {s:?}")))
        };
        let d = match parts[0] {
            "const" | "constant" => SizeDistribution::Constant { value: num(1)? },
            "uniform" => SizeDistribution::Uniform {
                low: num(1)?,
                high: num(2)?,
            },
            _ => return Err(bad(format!("unknown size distribution {s:?}"))),
        };
        d.check()?;
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ArrivalProcess {
    /// Everything arrives at time zero.
    #[default]
    Batch,
    Fixed {
        interval: f64,
    },
    Poisson {
        rate: f64,
    },
}

impl ArrivalProcess {
    fn check(&self) -> Result<()> {
        match *self {
            ArrivalProcess::Batch => Ok(()),
            ArrivalProcess::Fixed { interval } if interval >= 0.0 && interval.is_finite() => Ok(()),
            ArrivalProcess::Poisson { rate } if rate > 0.0 && rate.is_finite() => Ok(()),
            other => Err(bad(format!("{other:?}: invalid arrival process"))),
        }
    }

    fn times(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<Time> {
        let mut t = 0.0;
        (0..count)
            .map(|i| match *self {
                ArrivalProcess::Batch => Time::ZERO,
                ArrivalProcess::Fixed { interval } => Time::from_f64(interval * i as f64),
                ArrivalProcess::Poisson { rate } => {
                    if i > 0 {
                        t += Exp::new(rate).expect("checked").sample(rng);
                    }
                    Time::from_f64(t)
                }
            })
            .collect()
    }
}

impl FromStr for ArrivalProcess {
    type Err = Error;

    /// `batch`, `fixed:INTERVAL` or `poisson:RATE`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = || -> Result<f64> {
            parts
                .get(1)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad(format!("bad arrival process {s:?}")))
        };
        let a = match parts[0] {
            "batch" => ArrivalProcess::Batch,
            "fixed" => ArrivalProcess::Fixed { interval: num()? },
            "poisson" => ArrivalProcess::Poisson { rate: num()? },
            _ => return Err(bad(format!("unknown arrival process {s:?}"))),
        };
        a.check()?;
        Ok(a)
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(bad(format!("{name} must lie in (0, 1]")))
    }
}

fn check_slack(slack: Option<f64>) -> Result<()> {
    match slack {
        Some(s) if !(s > 0.0 && s.is_finite()) => Err(bad("deadline slack must be positive")),
        _ => Ok(()),
    }
}

fn mandatory(cost: Time, fraction: f64) -> Time {
    cost.scale(fraction).max(Time::RESOLUTION).min(cost)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GangGenSpec {
    pub count: usize,
    pub size: SizeDistribution,
    pub cost: CostDistribution,
    #[serde(default)]
    pub arrival: ArrivalProcess,
    /// Mandatory part as a fraction of each member's cost.
    #[serde(default = "one")]
    pub mandatory_fraction: f64,
    /// Gang deadline = arrival + slack * largest member cost.
    #[serde(default)]
    pub deadline_slack: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DagGenSpec {
    pub count: usize,
    pub layers: usize,
    /// Maximum layer width and maximum number of parents per task.
    pub fanout: usize,
    pub cost: CostDistribution,
    /// Communication-to-computation ratio: mean edge cost over mean parent cost.
    #[serde(default = "one")]
    pub ccr: f64,
    /// DAG deadline = arrival + slack * critical path length.
    #[serde(default)]
    pub deadline_slack: Option<f64>,
    #[serde(default = "one")]
    pub mandatory_fraction: f64,
    #[serde(default)]
    pub arrival: ArrivalProcess,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BotGenSpec {
    pub count: usize,
    pub tasks_per_bot: usize,
    /// Speed factor of each processor; one ETC column per entry.
    pub speeds: Vec<f64>,
    /// ETC entry = cost / speed * U(1, 1 + heterogeneity).
    #[serde(default)]
    pub heterogeneity: f64,
    pub cost: CostDistribution,
    /// Task deadline = arrival + slack * fastest ETC entry.
    #[serde(default)]
    pub deadline_slack: Option<f64>,
}

fn one() -> f64 {
    1.0
}

pub fn gen_gangs(spec: &GangGenSpec, seed: u64) -> Result<Vec<Gang>> {
    spec.size.check()?;
    spec.cost.check()?;
    spec.arrival.check()?;
    check_fraction("mandatory fraction", spec.mandatory_fraction)?;
    check_slack(spec.deadline_slack)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrivals = spec.arrival.times(spec.count, &mut rng);
    let mut gangs = Vec::with_capacity(spec.count);
    for (g, &arrival) in arrivals.iter().enumerate() {
        let size = spec.size.sample(&mut rng);
        let costs: Vec<Time> = (0..size).map(|_| spec.cost.sample(&mut rng)).collect();
        let longest = costs.iter().copied().max().expect("size >= 1");
        let tasks = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut t = Task::new(i as u32, c).with_min_cost(mandatory(c, spec.mandatory_fraction));
                if let Some(s) = spec.deadline_slack {
                    t = t.with_deadline(arrival + longest.scale(s).max(Time::RESOLUTION));
                }
                t
            })
            .collect();
        gangs.push(Gang::new(g as u32, arrival, tasks));
    }
    Ok(gangs)
}

pub fn gen_dags(spec: &DagGenSpec, seed: u64) -> Result<Vec<DagApp>> {
    spec.cost.check()?;
    spec.arrival.check()?;
    check_fraction("mandatory fraction", spec.mandatory_fraction)?;
    check_slack(spec.deadline_slack)?;
    if spec.layers == 0 || spec.fanout == 0 {
        return Err(bad("layers and fanout must be >= 1"));
    }
    if !(spec.ccr >= 0.0 && spec.ccr.is_finite()) {
        return Err(bad("ccr must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrivals = spec.arrival.times(spec.count, &mut rng);
    let mut dags = Vec::with_capacity(spec.count);
    for (d, &arrival) in arrivals.iter().enumerate() {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut prev: Vec<u32> = Vec::new();
        for _ in 0..spec.layers {
            let width = rng.gen_range(1..=spec.fanout);
            let mut layer = Vec::with_capacity(width);
            for _ in 0..width {
                let id = nodes.len() as u32;
                let c = spec.cost.sample(&mut rng);
                nodes.push(Task::new(id, c).with_min_cost(mandatory(c, spec.mandatory_fraction)));
                if !prev.is_empty() {
                    let k = rng.gen_range(1..=spec.fanout.min(prev.len()));
                    let picked: BTreeSet<usize> = sample(&mut rng, prev.len(), k).into_iter().collect();
                    for p in picked {
                        let parent = prev[p];
                        let noise = rng.gen_range(0.5..1.5);
                        let comm = nodes[parent as usize].cost.scale(spec.ccr * noise);
                        edges.push(Edge::new(parent, id, comm));
                    }
                }
                layer.push(id);
            }
            prev = layer;
        }
        let mut app = DagApp::new(d as u32, nodes, edges);
        app.arrival = arrival;
        if let Some(s) = spec.deadline_slack {
            let cp = critical_path(&validate_dag(app.clone())?).1;
            app.deadline = Some(arrival + cp.scale(s).max(Time::RESOLUTION));
        }
        dags.push(app);
    }
    Ok(dags)
}

pub fn gen_bots(spec: &BotGenSpec, seed: u64) -> Result<Vec<BotApp>> {
    spec.cost.check()?;
    check_slack(spec.deadline_slack)?;
    if spec.speeds.is_empty() || spec.speeds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(bad("bots need at least one processor with positive speed"));
    }
    if !(spec.heterogeneity >= 0.0 && spec.heterogeneity.is_finite()) {
        return Err(bad("heterogeneity must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bots = Vec::with_capacity(spec.count);
    for b in 0..spec.count {
        let mut tasks = Vec::with_capacity(spec.tasks_per_bot);
        let mut etc = Vec::with_capacity(spec.tasks_per_bot);
        for t in 0..spec.tasks_per_bot {
            let c = spec.cost.sample(&mut rng);
            let row: Vec<Time> = spec
                .speeds
                .iter()
                .map(|&s| {
                    let noise = if spec.heterogeneity > 0.0 {
                        rng.gen_range(1.0..1.0 + spec.heterogeneity)
                    } else {
                        1.0
                    };
                    c.scale(noise / s).max(Time::RESOLUTION)
                })
                .collect();
            let mut task = Task::new(t as u32, c);
            if let Some(s) = spec.deadline_slack {
                let fastest = row.iter().copied().min().expect("nonempty");
                task = task.with_deadline(fastest.scale(s).max(Time::RESOLUTION));
            }
            tasks.push(task);
            etc.push(row);
        }
        let mut bot = BotApp::new(b as u32, tasks, etc);
        bot.id = AppId(b as u32);
        bots.push(bot);
    }
    Ok(bots)
}

/// A generator spec of any workload class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "camelCase")]
pub enum GenSpec {
    Gangs(GangGenSpec),
    Dags(DagGenSpec),
    Bots(BotGenSpec),
}

impl GenSpec {
    pub fn generate(&self, seed: u64) -> Result<super::Workload> {
        let mut w = super::Workload::default();
        match self {
            GenSpec::Gangs(s) => w.gangs = gen_gangs(s, seed)?,
            GenSpec::Dags(s) => w.dags = gen_dags(s, seed)?,
            GenSpec::Bots(s) => w.bots = gen_bots(s, seed)?,
        }
        Ok(w)
    }

    /// Mean cost of the configured distribution; used in diagnostics.
    pub fn mean_cost(&self) -> f64 {
        match self {
            GenSpec::Gangs(s) => s.cost.mean(),
            GenSpec::Dags(s) => s.cost.mean(),
            GenSpec::Bots(s) => s.cost.mean(),
        }
    }
}

impl FromStr for GenSpec {
    type Err = Error;

    /// `gangs:count=..,size=..,cost=..,arrival=..,mandatory=..,slack=..`,
    /// `dag:count=..,layers=..,fanout=..,cost=..,ccr=..,slack=..,mandatory=..,arrival=..`,
    /// `bots:count=..,tasks=..,procs=..|speeds=1;2,het=..,cost=..,slack=..`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {item:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |kv: &mut std::collections::BTreeMap<String, String>, k: &str| kv.remove(k);
        fn num<T: FromStr>(v: Option<String>, key: &str, default: Option<T>) -> Result<T> {
            match v {
                Some(s) => s.parse().map_err(|_| bad(format!("invalid value {s:?} for {key}"))),
                None => default.ok_or_else(|| bad(format!("missing required key {key}"))),
            }
        }
        let opt_num = |v: Option<String>, key: &str| -> Result<Option<f64>> {
            v.map(|s| s.parse().map_err(|_| bad(format!("invalid value {s:?} for {key}"))))
                .transpose()
        };
        let cost = |v: Option<String>| -> Result<CostDistribution> {
            v.map_or(Ok(CostDistribution::Constant { value: 1.0 }), |s| s.parse())
        };
        let arrival =
            |v: Option<String>| -> Result<ArrivalProcess> { v.map_or(Ok(ArrivalProcess::Batch), |s| s.parse()) };
        let spec = match kind {
            "gang" | "gangs" => GenSpec::Gangs(GangGenSpec {
                count: num(take(&mut kv, "count"), "count", Some(1))?,
                size: take(&mut kv, "size").map_or(Ok(SizeDistribution::Constant { value: 1 }), |s| s.parse())?,
                cost: cost(take(&mut kv, "cost"))?,
                arrival: arrival(take(&mut kv, "arrival"))?,
                mandatory_fraction: num(take(&mut kv, "mandatory"), "mandatory", Some(1.0))?,
                deadline_slack: opt_num(take(&mut kv, "slack"), "slack")?,
            }),
            "dag" | "dags" => GenSpec::Dags(DagGenSpec {
                count: num(take(&mut kv, "count"), "count", Some(1))?,
                layers: num(take(&mut kv, "layers"), "layers", None)?,
                fanout: num(take(&mut kv, "fanout"), "fanout", None)?,
                cost: cost(take(&mut kv, "cost"))?,
                ccr: num(take(&mut kv, "ccr"), "ccr", Some(1.0))?,
                deadline_slack: opt_num(take(&mut kv, "slack"), "slack")?,
                mandatory_fraction: num(take(&mut kv, "mandatory"), "mandatory", Some(1.0))?,
                arrival: arrival(take(&mut kv, "arrival"))?,
            }),
            "bot" | "bots" => {
                let speeds = match (take(&mut kv, "speeds"), take(&mut kv, "procs")) {
                    (Some(list), _) => list
                        .split(';')
                        .map(|v| v.parse::<f64>().map_err(|_| bad(format!("invalid speed {v:?}"))))
                        .collect::<Result<Vec<_>>>()?,
                    (None, procs) => vec![1.0; num(procs, "procs", Some(1usize))?],
                };
                GenSpec::Bots(BotGenSpec {
                    count: num(take(&mut kv, "count"), "count", Some(1))?,
                    tasks_per_bot: num(take(&mut kv, "tasks"), "tasks", None)?,
                    speeds,
                    heterogeneity: num(take(&mut kv, "het"), "het", Some(0.0))?,
                    cost: cost(take(&mut kv, "cost"))?,
                    deadline_slack: opt_num(take(&mut kv, "slack"), "slack")?,
                })
            }
            _ => {
                return Err(bad(format!(
                    "unknown workload class {kind:?}; expected gangs, dag or bots"
                )))
            }
        };
        if let Some(k) = kv.keys().next() {
            return Err(bad(format!("unknown key {k:?} for {kind}")));
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag_spec(layers: usize, fanout: usize, ccr: f64) -> DagGenSpec {
        DagGenSpec {
            count: 1,
            layers,
            fanout,
            cost: CostDistribution::Constant { value: 1.0 },
            ccr,
            deadline_slack: None,
            mandatory_fraction: 1.0,
            arrival: ArrivalProcess::Batch,
        }
    }

    #[test]
    fn one_layer_one_fanout_is_single_node() {
        let dags = gen_dags(&dag_spec(1, 1, 1.0), 3).unwrap();
        assert_eq!(dags.len(), 1);
        assert_eq!(dags[0].nodes.len(), 1);
        assert!(dags[0].edges.is_empty());
    }

    #[test]
    fn same_seed_same_output() {
        let spec = DagGenSpec {
            count: 5,
            ..dag_spec(4, 3, 0.7)
        };
        assert_eq!(gen_dags(&spec, 11).unwrap(), gen_dags(&spec, 11).unwrap());
        assert_ne!(gen_dags(&spec, 11).unwrap(), gen_dags(&spec, 12).unwrap());
    }

    #[test]
    fn ccr_sets_mean_edge_cost() {
        let spec = DagGenSpec {
            count: 200,
            ..dag_spec(6, 4, 2.0)
        };
        let dags = gen_dags(&spec, 5).unwrap();
        let comms: Vec<f64> = dags
            .iter()
            .flat_map(|d| d.edges.iter().map(|e| e.comm.as_f64()))
            .collect();
        assert!(comms.len() >= 1000, "only {} edges", comms.len());
        let mean = comms.iter().sum::<f64>() / comms.len() as f64;
        assert!((mean - 2.0).abs() <= 0.2, "mean comm {mean}");
    }

    #[test]
    fn generated_dags_validate() {
        let spec = DagGenSpec {
            count: 30,
            deadline_slack: Some(1.5),
            mandatory_fraction: 0.5,
            cost: CostDistribution::Uniform { low: 1.0, high: 5.0 },
            ..dag_spec(5, 3, 1.0)
        };
        for d in gen_dags(&spec, 9).unwrap() {
            validate_dag(d).unwrap();
        }
    }

    #[test]
    fn bots_have_full_etc() {
        let spec: GenSpec = "bots:count=2,tasks=3,procs=2,het=0.5,cost=uniform:1:4".parse().unwrap();
        let w = spec.generate(1).unwrap();
        for b in &w.bots {
            b.validate(2).unwrap();
            assert_eq!(b.etc.len(), 3);
            assert!(b.etc.iter().all(|r| r.len() == 2));
        }
    }

    #[test]
    fn gangs_share_arrival_and_validate() {
        let spec: GenSpec = "gangs:count=20,size=uniform:1:4,cost=exp:3,arrival=poisson:0.5,mandatory=0.5,slack=3"
            .parse()
            .unwrap();
        let w = spec.generate(2).unwrap();
        assert_eq!(w.gangs.len(), 20);
        for g in &w.gangs {
            g.validate().unwrap();
            assert!(g.deadline().is_some());
        }
    }

    #[test]
    fn bad_params_are_rejected() {
        assert!(matches!(
            gen_dags(&dag_spec(0, 1, 1.0), 0),
            Err(Error::InvalidDistributionParams(_))
        ));
        assert!("dag:layers=2".parse::<GenSpec>().is_err());
        assert!("dag:layers=2,fanout=2,bogus=1".parse::<GenSpec>().is_err());
        assert!("gangs:cost=uniform:5:1".parse::<GenSpec>().is_err());
        assert!("gangs:arrival=poisson:0".parse::<GenSpec>().is_err());
    }
}
