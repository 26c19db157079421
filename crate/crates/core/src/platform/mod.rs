//! Processors, hosts and virtual machines, DVFS power behavior and
//! per-processor timelines of occupied slots and gaps.

mod schedule;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{HostId, ProcId, VmId};

pub use schedule::{energy_consumed, find_gaps, insert_slot, Gap, ScheduledSlot, Timeline, Timelines};

/// A processor. Execution time of a task is
/// `cost * actualCostFactor / (speedFactor * frequency)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Processor {
    pub id: ProcId,
    #[serde(default = "one")]
    pub speed_factor: f64,
    /// Available frequency ratios, strictly increasing and ending at 1.
    #[serde(default = "full_only")]
    pub frequency_levels: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn full_only() -> Vec<f64> {
    vec![1.0]
}

impl Processor {
    pub fn new(id: u32, speed_factor: f64) -> Self {
        Processor {
            id: ProcId(id),
            speed_factor,
            frequency_levels: full_only(),
        }
    }

    pub fn with_levels(mut self, levels: Vec<f64>) -> Self {
        self.frequency_levels = levels;
        self
    }

    /// Smallest configured level that is at least `ratio`, or 1 if none is.
    pub fn level_at_least(&self, ratio: f64) -> f64 {
        level_at_least(&self.frequency_levels, ratio)
    }

    pub fn lowest_level(&self) -> f64 {
        self.frequency_levels[0]
    }

    fn validate(&self) -> Result<()> {
        if !(self.speed_factor > 0.0 && self.speed_factor.is_finite()) {
            return Err(Error::InvalidPlatform(format!(
                "{}: speedFactor must be positive",
                self.id
            )));
        }
        let l = &self.frequency_levels;
        let increasing = l.windows(2).all(|w| w[0] < w[1]);
        if l.is_empty() || !increasing || l[0] <= 0.0 || *l.last().unwrap() != 1.0 {
            return Err(Error::InvalidPlatform(format!(
                "{}: frequencyLevels must be strictly increasing in (0, 1] and end at 1.0",
                self.id
            )));
        }
        Ok(())
    }
}

/// Smallest entry of the ascending `levels` that is at least `ratio`.
/// Falls back to 1 when `ratio` exceeds every level.
pub fn level_at_least(levels: &[f64], ratio: f64) -> f64 {
    // tolerate ratios that overshoot a level by float noise
    levels.iter().copied().find(|&l| l >= ratio - 1e-12).unwrap_or(1.0)
}

/// A virtual machine; each VM is backed by one processor of the platform and
/// shares its id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VmInstance {
    pub id: VmId,
    pub host: HostId,
    pub frequency: f64,
    pub busy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub id: HostId,
    pub vms: Vec<VmInstance>,
}

impl Host {
    pub fn is_idle(&self) -> bool {
        self.vms.iter().all(|v| !v.busy)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct HostConfig {
    id: HostId,
    vms: Vec<VmId>,
}

/// `power(f) = static + dynamic * f^exponent`; an idle processor draws
/// `static`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    #[serde(rename = "static")]
    pub static_power: f64,
    #[serde(rename = "dynamic")]
    pub dynamic_coefficient: f64,
    #[serde(default = "three")]
    pub exponent: f64,
}

fn three() -> f64 {
    3.0
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            static_power: 0.0,
            dynamic_coefficient: 1.0,
            exponent: 3.0,
        }
    }
}

impl PowerModel {
    pub fn new(static_power: f64, dynamic_coefficient: f64) -> Self {
        PowerModel {
            static_power,
            dynamic_coefficient,
            exponent: 3.0,
        }
    }

    pub fn power(&self, frequency: f64) -> f64 {
        self.static_power + self.dynamic_coefficient * frequency.powf(self.exponent)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.static_power >= 0.0
            && self.dynamic_coefficient >= 0.0
            && self.exponent > 0.0
            && self.static_power.is_finite()
            && self.dynamic_coefficient.is_finite()
            && self.exponent.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPlatform(
                "power model parameters must be finite and nonnegative".into(),
            ))
        }
    }
}

/// A validated platform description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", try_from = "PlatformRepr", into = "PlatformRepr")]
pub struct Platform {
    processors: Vec<Processor>,
    hosts: Vec<Host>,
    power_model: PowerModel,
    index: HashMap<ProcId, usize>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct PlatformRepr {
    processors: Vec<Processor>,
    #[serde(default)]
    hosts: Vec<HostConfig>,
    #[serde(default)]
    power_model: PowerModel,
}

impl TryFrom<PlatformRepr> for Platform {
    type Error = Error;

    fn try_from(r: PlatformRepr) -> Result<Self> {
        Platform::build(r.processors, r.hosts, r.power_model)
    }
}

impl From<Platform> for PlatformRepr {
    fn from(p: Platform) -> Self {
        PlatformRepr {
            hosts: p
                .hosts
                .iter()
                .map(|h| HostConfig {
                    id: h.id,
                    vms: h.vms.iter().map(|v| v.id).collect(),
                })
                .collect(),
            processors: p.processors,
            power_model: p.power_model,
        }
    }
}

impl Platform {
    /// A platform from explicit processors; every processor gets its own host.
    pub fn new(processors: Vec<Processor>, power_model: PowerModel) -> Result<Self> {
        Platform::build(processors, Vec::new(), power_model)
    }

    /// `n` identical unit-speed processors with ids `0..n`.
    pub fn uniform(n: usize) -> Self {
        Platform::new(
            (0..n as u32).map(|i| Processor::new(i, 1.0)).collect(),
            PowerModel::default(),
        )
        .expect("uniform platform is valid")
    }

    /// Groups processors into hosts; `groups[h]` lists the processor ids
    /// backing the VMs of host `h`.
    pub fn with_hosts(self, groups: &[Vec<u32>]) -> Result<Self> {
        let hosts = groups
            .iter()
            .enumerate()
            .map(|(h, vms)| HostConfig {
                id: HostId(h as u32),
                vms: vms.iter().map(|&v| VmId(v)).collect(),
            })
            .collect();
        Platform::build(self.processors, hosts, self.power_model)
    }

    pub fn with_levels(mut self, levels: &[f64]) -> Result<Self> {
        for p in &mut self.processors {
            p.frequency_levels = levels.to_vec();
        }
        let hosts = PlatformRepr::from(self.clone()).hosts;
        Platform::build(self.processors, hosts, self.power_model)
    }

    pub fn with_power_model(mut self, pm: PowerModel) -> Result<Self> {
        pm.validate()?;
        self.power_model = pm;
        Ok(self)
    }

    fn build(processors: Vec<Processor>, hosts: Vec<HostConfig>, power_model: PowerModel) -> Result<Self> {
        if processors.is_empty() {
            return Err(Error::InvalidPlatform("at least one processor is required".into()));
        }
        power_model.validate()?;
        let mut index = HashMap::new();
        for (i, p) in processors.iter().enumerate() {
            p.validate()?;
            if index.insert(p.id, i).is_some() {
                return Err(Error::InvalidPlatform(format!("duplicate processor id {}", p.id)));
            }
        }
        let hosts = if hosts.is_empty() {
            processors
                .iter()
                .enumerate()
                .map(|(h, p)| HostConfig {
                    id: HostId(h as u32),
                    vms: vec![VmId(p.id.0)],
                })
                .collect()
        } else {
            hosts
        };
        let mut owner: HashMap<VmId, HostId> = HashMap::new();
        let mut built = Vec::with_capacity(hosts.len());
        for h in hosts {
            let mut vms = Vec::with_capacity(h.vms.len());
            for v in h.vms {
                let Some(&pi) = index.get(&ProcId(v.0)) else {
                    return Err(Error::InvalidPlatform(format!("{v} does not name a processor")));
                };
                if owner.insert(v, h.id).is_some() {
                    return Err(Error::InvalidPlatform(format!("{v} belongs to more than one host")));
                }
                vms.push(VmInstance {
                    id: v,
                    host: h.id,
                    frequency: processors[pi].lowest_level(),
                    busy: false,
                });
            }
            built.push(Host { id: h.id, vms });
        }
        if owner.len() != processors.len() {
            return Err(Error::InvalidPlatform(
                "every processor must back exactly one VM".into(),
            ));
        }
        Ok(Platform {
            processors,
            hosts: built,
            power_model,
            index,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Platform::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn processors(&self) -> &[Processor] {
        &self.processors
    }

    pub fn processor(&self, i: usize) -> &Processor {
        &self.processors[i]
    }

    pub fn len(&self) -> usize {
        self.processors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.processors.is_empty()
    }

    pub fn index_of(&self, id: ProcId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn hosts(&self) -> &[Host] {
        &self.hosts
    }

    pub fn power_model(&self) -> &PowerModel {
        &self.power_model
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.processors.iter().map(|p| p.speed_factor).collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.processors
            .iter()
            .all(|p| p.speed_factor == self.processors[0].speed_factor)
    }
}
