use crate::error::{Error, Result};
use crate::ids::TaskId;
use crate::time::Time;

use super::{Dag, Task};

/// Deadline minus the estimated finish time. Negative when the task is late.
pub fn laxity(task: &Task, estimated_finish: Time) -> Result<Time> {
    let d = task.deadline.ok_or(Error::NoDeadline(task.id))?;
    Ok(d - estimated_finish)
}

/// DAG deadline minus the level of the task.
pub fn space_time(dag: &Dag, task: TaskId) -> Result<Time> {
    let d = dag.deadline().ok_or(Error::NoAppDeadline(dag.id()))?;
    Ok(d - dag.level(dag.idx(task)?))
}

/// Output error of a monotone task that executed `executed` units of work:
/// 0 for a complete run, 1 for the bare mandatory part, linear in between.
pub fn output_error(task: &Task, executed: Time) -> Result<f64> {
    if executed < task.min_cost {
        return Err(Error::BelowMandatory {
            executed,
            min_cost: task.min_cost,
        });
    }
    let optional = task.optional_cost();
    if !optional.is_positive() || executed >= task.cost {
        return Ok(0.0);
    }
    Ok((task.cost - executed).ticks() as f64 / optional.ticks() as f64)
}

/// Smallest executed amount whose output error stays within `limit`.
pub fn min_amount_for_error_limit(task: &Task, limit: f64) -> Time {
    let optional = task.optional_cost();
    if !optional.is_positive() {
        return task.cost;
    }
    let skippable = (optional.ticks() as f64 * limit.clamp(0.0, 1.0)).floor() as i64;
    let mut amount = task.cost - Time::from_ticks(skippable);
    // floor of a product may still leave the error a hair above the limit
    while amount < task.cost && output_error(task, amount).map_or(true, |e| e > limit) {
        amount += Time::RESOLUTION;
    }
    amount.max(task.min_cost)
}
