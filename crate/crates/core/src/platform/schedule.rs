use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{AppId, ProcId, TaskId};
use crate::time::Time;
use crate::workload::Task;

use super::{Platform, PowerModel};

/// One execution interval of a task on a processor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduledSlot {
    pub app: AppId,
    pub task: TaskId,
    pub processor: ProcId,
    pub start: Time,
    pub finish: Time,
    /// Work done in the slot.
    pub executed: Time,
    pub frequency: f64,
    /// Redundant copy of a task placed by duplication.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub duplicate: bool,
}

impl ScheduledSlot {
    pub fn duration(&self) -> Time {
        self.finish - self.start
    }
}

/// An idle interval; `end == None` is the trailing idle time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub processor: ProcId,
    pub start: Time,
    pub end: Option<Time>,
}

impl Gap {
    pub fn end_or_max(&self) -> Time {
        self.end.unwrap_or(Time::MAX)
    }

    pub fn is_trailing(&self) -> bool {
        self.end.is_none()
    }
}

/// Idle intervals of one processor from `horizon_start` on, in increasing
/// order. Slots and gaps together tile `[horizon_start, inf)`.
pub fn find_gaps(processor: ProcId, slots: &[ScheduledSlot], horizon_start: Time) -> Result<Vec<Gap>> {
    let mut sorted: Vec<&ScheduledSlot> = slots.iter().collect();
    sorted.sort_by_key(|s| (s.start, s.finish));
    if sorted.windows(2).any(|w| w[1].start < w[0].finish) {
        return Err(Error::OverlappingSlots(processor));
    }
    let mut gaps = Vec::new();
    let mut cursor = horizon_start;
    for s in sorted {
        if s.finish <= cursor {
            continue;
        }
        if s.start > cursor {
            gaps.push(Gap {
                processor,
                start: cursor,
                end: Some(s.start),
            });
        }
        cursor = s.finish;
    }
    gaps.push(Gap {
        processor,
        start: cursor,
        end: None,
    });
    Ok(gaps)
}

/// Occupied slots of one processor, kept sorted by start time.
#[derive(Clone, Debug, PartialEq)]
pub struct Timeline {
    pub processor: ProcId,
    pub speed: f64,
    slots: Vec<ScheduledSlot>,
}

impl Timeline {
    pub fn new(processor: ProcId, speed: f64) -> Self {
        Timeline {
            processor,
            speed,
            slots: Vec::new(),
        }
    }

    pub fn slots(&self) -> &[ScheduledSlot] {
        &self.slots
    }

    pub fn last_finish(&self) -> Time {
        self.slots.last().map_or(Time::ZERO, |s| s.finish)
    }

    pub fn gaps(&self, horizon_start: Time) -> Vec<Gap> {
        find_gaps(self.processor, &self.slots, horizon_start).expect("timeline slots never overlap")
    }

    /// Bounded gaps only.
    pub fn inner_gaps(&self, horizon_start: Time) -> Vec<Gap> {
        let mut g = self.gaps(horizon_start);
        g.pop();
        g
    }

    /// Earliest start at or after `ready` for an interval of `duration`;
    /// with `insertion` idle gaps between slots are considered, otherwise
    /// only the time after the last slot.
    pub fn earliest_start(&self, ready: Time, duration: Time, insertion: bool) -> Time {
        if !insertion {
            return ready.max(self.last_finish());
        }
        for g in self.gaps(Time::ZERO) {
            let s = g.start.max(ready);
            if s + duration <= g.end_or_max() {
                return s;
            }
        }
        unreachable!("the trailing gap is unbounded")
    }

    fn check_free(&self, start: Time, finish: Time) -> Result<()> {
        let clash = self.slots.iter().any(|s| s.start < finish && start < s.finish);
        if clash {
            return Err(Error::Overlap {
                processor: self.processor,
                start,
                end: finish,
            });
        }
        Ok(())
    }

    /// Adds a prepared slot. Existing slots are never moved.
    pub fn push(&mut self, slot: ScheduledSlot) -> Result<()> {
        if slot.finish <= slot.start {
            return Err(Error::InvalidConfig(format!(
                "slot of {} on {} is empty",
                slot.task, self.processor
            )));
        }
        self.check_free(slot.start, slot.finish)?;
        let pos = self.slots.partition_point(|s| s.start < slot.start);
        self.slots.insert(pos, slot);
        Ok(())
    }

    pub fn remove_last(&mut self) -> Option<ScheduledSlot> {
        self.slots.pop()
    }
}

/// Places `task` on the timeline over `[start, start + duration)` at the given
/// frequency. The executed amount follows from the processor speed, capped at
/// the task's cost.
pub fn insert_slot(
    timeline: &mut Timeline,
    app: AppId,
    task: &Task,
    start: Time,
    duration: Time,
    frequency: f64,
) -> Result<ScheduledSlot> {
    if start < task.release() {
        return Err(Error::DataNotReady {
            task: task.id,
            start,
            ready: task.release(),
        });
    }
    let slot = ScheduledSlot {
        app,
        task: task.id,
        processor: timeline.processor,
        start,
        finish: start + duration,
        executed: duration.scale(timeline.speed * frequency).min(task.cost),
        frequency,
        duplicate: false,
    };
    timeline.push(slot)?;
    Ok(slot)
}

/// One timeline per platform processor, in platform order.
#[derive(Clone, Debug, PartialEq)]
pub struct Timelines(pub Vec<Timeline>);

impl Timelines {
    pub fn new(platform: &Platform) -> Self {
        Timelines(
            platform
                .processors()
                .iter()
                .map(|p| Timeline::new(p.id, p.speed_factor))
                .collect(),
        )
    }

    pub fn all_slots(&self) -> Vec<ScheduledSlot> {
        let mut v: Vec<ScheduledSlot> = self.0.iter().flat_map(|t| t.slots().iter().copied()).collect();
        v.sort_by_key(|s| (s.start, s.processor, s.task));
        v
    }
}

/// Energy in joules: busy slots at `power(frequency)` plus idle intervals at
/// static power.
pub fn energy_consumed(pm: &PowerModel, slots: &[ScheduledSlot], idle: &[(Time, Time)]) -> f64 {
    let busy: f64 = slots
        .iter()
        .map(|s| pm.power(s.frequency) * s.duration().as_f64())
        .sum();
    let idle: f64 = idle
        .iter()
        .map(|&(a, b)| pm.static_power * (b - a).max(Time::ZERO).as_f64())
        .sum();
    busy + idle
}
