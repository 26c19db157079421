#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use schedarena::ids::ProcId;
use schedarena::platform::{Platform, PowerModel, Processor, ScheduledSlot};
use schedarena::time::Time;
use schedarena::workload::{DagApp, Edge, Gang, PeriodicTask, Task};

pub fn u(v: i64) -> Time {
    Time::units(v)
}

pub fn t(v: f64) -> Time {
    Time::from_f64(v)
}

/// Random connected-enough DAG with up to `max_nodes` tasks. Costs and
/// communication delays are multiples of 0.5; the DAG deadline is loose.
pub fn random_dag(rng: &mut ChaCha8Rng, id: u32, max_nodes: usize) -> DagApp {
    let n = rng.gen_range(1..=max_nodes);
    let mut nodes = Vec::with_capacity(n);
    let mut total = 0;
    for i in 0..n {
        let c = rng.gen_range(1..=10);
        total += c;
        let mut task = Task::new(i as u32, t(c as f64 / 2.0));
        if rng.gen_bool(0.3) {
            let min = rng.gen_range(1..=c);
            task = task.with_min_cost(t(min as f64 / 2.0));
        }
        if rng.gen_bool(0.2) {
            task = task.with_data_ready(t(rng.gen_range(0..6) as f64 / 2.0));
        }
        nodes.push(task);
    }
    let mut edges = Vec::new();
    for j in 1..n {
        for i in 0..j {
            if rng.gen_bool(0.35) {
                let comm = rng.gen_range(0..=6);
                total += comm;
                edges.push(Edge::new(i as u32, j as u32, t(comm as f64 / 2.0)));
            }
        }
    }
    DagApp::new(id, nodes, edges).with_deadline(t(total as f64 / 2.0 + 5.0))
}

/// Like [`random_dag`] but every task carries its own deadline.
pub fn random_dag_with_task_deadlines(rng: &mut ChaCha8Rng, id: u32, max_nodes: usize) -> DagApp {
    let mut d = random_dag(rng, id, max_nodes);
    let horizon = d.deadline.expect("random DAGs have deadlines");
    for task in &mut d.nodes {
        let slack = rng.gen_range(0..=20) as f64 / 2.0;
        task.deadline = Some(task.release() + task.cost + t(slack).min(horizon));
    }
    d
}

pub fn random_platform(rng: &mut ChaCha8Rng, max_procs: usize, heterogeneous: bool) -> Platform {
    let n = rng.gen_range(1..=max_procs);
    let procs = (0..n as u32)
        .map(|i| {
            let s = if heterogeneous {
                [1.0, 1.5, 2.0][rng.gen_range(0..3)]
            } else {
                1.0
            };
            Processor::new(i, s)
        })
        .collect();
    Platform::new(procs, PowerModel::default()).unwrap()
}

/// Random gangs for a platform with `procs` processors. With `deadlines`
/// every member gets a mandatory part and the gang a deadline.
pub fn random_gangs(rng: &mut ChaCha8Rng, procs: usize, deadlines: bool) -> Vec<Gang> {
    let count = rng.gen_range(1..=6);
    (0..count)
        .map(|g| {
            let size = rng.gen_range(1..=procs);
            let arrival = t(rng.gen_range(0..10) as f64 / 2.0);
            let tasks: Vec<Task> = (0..size)
                .map(|i| {
                    let c = rng.gen_range(1..=8);
                    let mut task = Task::new(i as u32, t(c as f64 / 2.0)).with_arrival(arrival);
                    if deadlines {
                        let min = rng.gen_range(1..=c);
                        let d = arrival + t((c + rng.gen_range(0..=12)) as f64 / 2.0);
                        task = task.with_min_cost(t(min as f64 / 2.0)).with_deadline(d);
                    }
                    task
                })
                .collect();
            let mut gang = Gang::new(g as u32, arrival, tasks);
            if rng.gen_bool(0.2) {
                let mut ps: Vec<u32> = (0..procs as u32).collect();
                for i in (1..ps.len()).rev() {
                    ps.swap(i, rng.gen_range(0..=i));
                }
                gang = gang.with_placement(ps[..size].iter().map(|&p| ProcId(p)).collect());
            }
            gang
        })
        .collect()
}

pub fn random_etc(rng: &mut ChaCha8Rng, tasks: usize, procs: usize) -> Vec<Vec<f64>> {
    (0..tasks)
        .map(|_| (0..procs).map(|_| rng.gen_range(1..=9) as f64).collect())
        .collect()
}

pub fn random_periodic(rng: &mut ChaCha8Rng) -> Vec<PeriodicTask> {
    loop {
        let n = rng.gen_range(1..=3);
        let tasks: Vec<PeriodicTask> = (0..n)
            .map(|i| {
                let p = rng.gen_range(2..=8);
                let m = rng.gen_range(1..=p / 2);
                let o = rng.gen_range(0..=2);
                PeriodicTask::new(i as u32, u(p), u(m), u(o))
                    .with_actual_cost_factor([0.5, 0.75, 1.0][rng.gen_range(0..3)])
            })
            .collect();
        let util: f64 = tasks
            .iter()
            .map(|x| x.mandatory_cost.as_f64() / x.period.as_f64())
            .sum();
        if util <= 1.0 {
            return tasks;
        }
    }
}

/// Per-task view recovered from raw trace lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub arrival: i64,
    pub start: i64,
    pub finish: i64,
    pub deadline: Option<i64>,
    pub missed: bool,
}

fn ticks(v: &Value) -> i64 {
    (v.as_f64().expect("times are numbers") * 1e6).round() as i64
}

/// Rebuilds per-task rows from the JSON lines of a trace file without the
/// library's trace types.
pub fn reduce(jsonl: &str) -> Vec<Row> {
    #[derive(Default)]
    struct Acc {
        arrival: i64,
        deadline: Option<i64>,
        start: Option<i64>,
        end: Option<(i64, bool)>,
        dropped: Option<i64>,
    }
    let mut acc: BTreeMap<(u64, u64), Acc> = BTreeMap::new();
    for line in jsonl.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let Some(kind) = v.get("kind").and_then(Value::as_str) else {
            continue;
        };
        let time = ticks(&v["time"]);
        let key = || (v["app"].as_u64().unwrap(), v["task"].as_u64().unwrap());
        let dup = v.get("duplicate").and_then(Value::as_bool).unwrap_or(false);
        match kind {
            "arrival" => {
                let a = acc.entry(key()).or_default();
                a.arrival = time;
                a.deadline = v["deadline"].as_f64().map(|_| ticks(&v["deadline"]));
            }
            "slotStart" if !dup => {
                acc.entry(key()).or_default().start.get_or_insert(time);
            }
            "slotFinish" if !dup => {
                let outcome = v["outcome"].as_str().unwrap();
                if outcome != "interrupted" {
                    acc.entry(key()).or_default().end = Some((time, outcome == "missed"));
                }
            }
            "deadlineReached" => {
                acc.entry(key()).or_default().dropped.get_or_insert(time);
            }
            _ => {}
        }
    }
    acc.into_values()
        .filter_map(|a| {
            let (finish, missed) = a.end.or(a.dropped.map(|d| (d, true)))?;
            Some(Row {
                arrival: a.arrival,
                start: a.start.unwrap_or(finish),
                finish,
                deadline: a.deadline,
                missed,
            })
        })
        .collect()
}

/// Response, makespan, guarantee ratio and tardiness of `rows`.
pub fn metrics_of(rows: &[Row]) -> (Option<f64>, i64, Option<f64>, Option<f64>) {
    if rows.is_empty() {
        return (None, 0, None, None);
    }
    let n = rows.len() as f64;
    let resp: i128 = rows.iter().map(|r| (r.finish - r.arrival) as i128).sum();
    let resp = resp as f64 / n / 1e6;
    let span = rows.iter().map(|r| r.finish).max().unwrap() - rows.iter().map(|r| r.start).min().unwrap();
    if rows.iter().any(|r| r.deadline.is_none()) {
        return (Some(resp), span, None, None);
    }
    let met = rows
        .iter()
        .filter(|r| !r.missed && r.finish <= r.deadline.unwrap())
        .count();
    let tard: i128 = rows
        .iter()
        .map(|r| (r.finish - r.deadline.unwrap()).max(0) as i128)
        .sum();
    (Some(resp), span, Some(met as f64 / n), Some(tard as f64 / n / 1e6))
}

/// Precedence, release, work and non-overlap check written against the raw
/// graph description, independent of the library's validator.
pub fn check_schedule(app: &DagApp, platform: &Platform, slots: &[ScheduledSlot]) -> Result<(), String> {
    let speed: BTreeMap<ProcId, f64> = platform.processors().iter().map(|p| (p.id, p.speed_factor)).collect();
    for node in &app.nodes {
        let primaries = slots.iter().filter(|s| s.task == node.id && !s.duplicate).count();
        if primaries != 1 {
            return Err(format!("{} has {primaries} primary slots", node.id));
        }
    }
    for s in slots {
        let node = app
            .nodes
            .iter()
            .find(|n| n.id == s.task)
            .ok_or_else(|| format!("unknown task {}", s.task))?;
        let sp = *speed
            .get(&s.processor)
            .ok_or_else(|| format!("unknown processor {}", s.processor))?;
        if s.start >= s.finish {
            return Err(format!("{}: empty slot", s.task));
        }
        let lo = if s.duplicate { node.cost } else { node.min_cost };
        if s.executed < lo || s.executed > node.cost {
            return Err(format!("{}: executed {} outside bounds", s.task, s.executed));
        }
        let capacity = (s.finish - s.start).ticks() as f64 * sp * s.frequency;
        if capacity + 1.0 < s.executed.ticks() as f64 {
            return Err(format!("{}: slot too short", s.task));
        }
        if s.start < app.arrival.max(node.arrival).max(node.data_ready) {
            return Err(format!("{}: starts before release", s.task));
        }
        for e in app.edges.iter().filter(|e| e.to == s.task) {
            let fed = slots.iter().filter(|c| c.task == e.from).any(|c| {
                let comm = if c.processor == s.processor { Time::ZERO } else { e.comm };
                c.finish + comm <= s.start
            });
            if !fed {
                return Err(format!("{} starts before data from {}", s.task, e.from));
            }
        }
    }
    for a in slots {
        for b in slots {
            if !std::ptr::eq(a, b) && a.processor == b.processor && a.start < b.finish && b.start < a.finish {
                return Err(format!("{} and {} overlap on {}", a.task, b.task, a.processor));
            }
        }
    }
    Ok(())
}
