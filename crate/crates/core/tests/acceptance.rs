//! Acceptance criteria 1-9. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use schedarena::botsched::{map_from, max_min, min_min, sufferage, BotHeuristic};
use schedarena::cli::{cmd_run, ExperimentConfig, Format};
use schedarena::dagsched::{
    dsc, dsh_with_log, edf, edf_ac, validate_schedule, AcVariant, DagPolicy, GaParams, SaParams,
};
use schedarena::energy::EnergyPolicy;
use schedarena::engine::{run, EventKind, FaultConfig, Outcome, RunConfig, RunOutput};
use schedarena::error::Error;
use schedarena::ids::{AppId, ProcId, TaskId};
use schedarena::platform::{find_gaps, Gap, Platform, PowerModel, Processor, Timelines};
use schedarena::time::Time;
use schedarena::workload::{validate_dag, BotApp, DagApp, Edge, Gang, GenSpec, PeriodicTask, Task, Workload};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table1_nodes() -> Vec<Task> {
    let task = |id, d, data, c, cmin| {
        Task::new(id, u(c))
            .with_min_cost(u(cmin))
            .with_deadline(u(d))
            .with_data_ready(u(data))
    };
    vec![
        task(1, 2, 0, 1, 1),
        task(2, 4, 2, 1, 1),
        task(3, 9, 5, 2, 1),
        task(4, 10, 1, 3, 1),
    ]
}

fn criterion_1() -> Check {
    let started = Instant::now();
    let dag = validate_dag(DagApp::new(0, table1_nodes(), vec![])).unwrap();
    let p = Platform::uniform(1);
    let base = edf(&dag, &p).unwrap();
    let spans: Vec<(u32, Time, Time)> = (1..=4)
        .map(|i| {
            let s = base.primary(TaskId(i)).unwrap();
            (i, s.start, s.finish)
        })
        .collect();
    let want = vec![(1, u(0), u(1)), (2, u(2), u(3)), (3, u(5), u(7)), (4, u(7), u(10))];
    ensure(spans == want, || format!("baseline EDF slots {spans:?}"))?;
    let gaps: Vec<Gap> = find_gaps(ProcId(0), &base.slots, Time::ZERO)
        .unwrap()
        .into_iter()
        .filter(|g| !g.is_trailing())
        .collect();
    let gap_spans: Vec<(Time, Option<Time>)> = gaps.iter().map(|g| (g.start, g.end)).collect();
    ensure(gap_spans == vec![(u(1), Some(u(2))), (u(3), Some(u(5)))], || {
        format!("gaps {gap_spans:?}")
    })?;
    for (v, want) in [
        (AcVariant::FirstFit, (u(1), u(2), u(1))),
        (AcVariant::BestFit, (u(3), u(5), u(2))),
        (AcVariant::WorstFit, (u(3), u(4), u(1))),
    ] {
        let s = edf_ac(&dag, &p, v).unwrap();
        validate_schedule(&dag, &p, &s).map_err(|e| e.to_string())?;
        let n4 = s.primary(TaskId(4)).unwrap();
        let got = (n4.start, n4.finish, n4.executed);
        ensure(got == want, || format!("{v:?}: n4 at {got:?}"))?;
    }
    let w = Workload {
        dags: vec![DagApp::new(0, table1_nodes(), vec![])],
        ..Workload::default()
    };
    let out = run(&w, &p, &RunConfig::new("edf".parse().unwrap(), 0)).unwrap();
    let finishes: Vec<Time> = out.report.per_task.iter().map(|r| r.finish).collect();
    ensure(finishes == vec![u(1), u(3), u(7), u(10)], || {
        format!("simulated finishes {finishes:?}")
    })?;
    let elapsed = started.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("exact slots, gaps and AC placements in {elapsed:?}"))
}

fn periodic_platform() -> Platform {
    Platform::new(
        vec![Processor::new(0, 1.0).with_levels(vec![0.25, 0.5, 0.75, 1.0])],
        PowerModel::new(0.1, 1.0),
    )
    .unwrap()
}

/// Workload number `i` of the metrics sweep and the policy it runs under.
fn sweep_case(i: usize, rng: &mut ChaCha8Rng) -> (Workload, Platform, RunConfig) {
    let seed = rng.gen();
    match i % 5 {
        0 => {
            let p = random_platform(rng, 4, false);
            let gangs = random_gangs(rng, p.len(), true);
            let policy = [
                "afcfs",
                "lgfs",
                "edf-gang-ac:restricted",
                "edf-gang-ac:holistic",
                "afcfs+bypass:2+migrate:2",
            ][rng.gen_range(0..5)];
            let mut cfg = RunConfig::new(policy.parse().unwrap(), seed);
            if rng.gen_bool(0.5) {
                cfg.faults = Some(FaultConfig {
                    lambda: 0.2,
                    checkpoint_interval: Some(u(1)),
                    overhead: Time::ZERO,
                });
            }
            let w = Workload {
                gangs,
                ..Workload::default()
            };
            (w, p, cfg)
        }
        1 => {
            let p = random_platform(rng, 3, true);
            let dags = (0..rng.gen_range(1..=3))
                .map(|k| {
                    let mut d = random_dag_with_task_deadlines(rng, k, 8);
                    d.arrival = t(rng.gen_range(0..6) as f64);
                    d
                })
                .collect();
            let policy = [
                "hlf",
                "ish",
                "heft",
                "dsc",
                "dsh",
                "lstf",
                "edf",
                "edf-ac:bf",
                "sa:5,0.8,3",
                "ga:6,4,0.8,0.2",
            ][rng.gen_range(0..10)];
            let w = Workload {
                dags,
                ..Workload::default()
            };
            (w, p, RunConfig::new(policy.parse().unwrap(), seed))
        }
        2 => {
            let spec: GenSpec = "bots:count=2,tasks=5,procs=3,het=0.5,cost=uniform:1:6,slack=3"
                .parse()
                .unwrap();
            let w = spec.generate(seed).unwrap();
            let policy = ["minmin", "maxmin", "sufferage", "caees"][rng.gen_range(0..4)];
            (w, Platform::uniform(3), RunConfig::new(policy.parse().unwrap(), seed))
        }
        3 => {
            let w = Workload {
                periodic: random_periodic(rng),
                ..Workload::default()
            };
            let energy = [EnergyPolicy::None, EnergyPolicy::SlackReclaim, EnergyPolicy::MfedCcrt][rng.gen_range(0..3)];
            let mut cfg = RunConfig::new("mfed".parse().unwrap(), seed);
            cfg.energy = energy;
            (w, periodic_platform(), cfg)
        }
        _ => {
            let spec: GenSpec =
                "dag:count=3,layers=3,fanout=3,cost=uniform:1:5,ccr=0.5,slack=2,mandatory=0.5,arrival=fixed:2"
                    .parse()
                    .unwrap();
            let w = spec.generate(seed).unwrap();
            let mut cfg = RunConfig::new("heft".parse().unwrap(), seed);
            cfg.faults = Some(FaultConfig {
                lambda: 0.1,
                checkpoint_interval: Some(t(1.5)),
                overhead: t(0.1),
            });
            (w, Platform::uniform(2), cfg)
        }
    }
}

fn compare_reducer(out: &RunOutput) -> Result<(), String> {
    let rows = reduce(&out.trace.to_jsonl(&out.report));
    let (resp, span, tgr, tard) = metrics_of(&rows);
    let r = &out.report;
    ensure(rows.len() == r.tasks, || {
        format!("{} rows vs {} tasks", rows.len(), r.tasks)
    })?;
    ensure(resp == r.avg_response, || {
        format!("response {resp:?} vs {:?}", r.avg_response)
    })?;
    ensure(span == r.makespan.ticks(), || {
        format!("makespan {span} vs {}", r.makespan)
    })?;
    ensure(tgr == r.tgr, || format!("tgr {tgr:?} vs {:?}", r.tgr))?;
    ensure(tard == r.avg_tardiness, || {
        format!("tardiness {tard:?} vs {:?}", r.avg_tardiness)
    })?;
    if let Some(x) = r.tgr {
        ensure((0.0..=1.0).contains(&x), || format!("tgr {x} out of range"))?;
    }
    ensure(r.avg_tardiness.is_none_or(|x| x >= 0.0), || "negative tardiness".into())
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tasks = 0;
    for i in 0..100 {
        let (w, p, cfg) = sweep_case(i, &mut rng);
        let out = run(&w, &p, &cfg).map_err(|e| format!("case {i} ({}): {e}", cfg.policy))?;
        tasks += out.report.tasks;
        compare_reducer(&out).map_err(|e| format!("case {i} ({}): {e}", cfg.policy))?;
    }
    let w = Workload {
        dags: vec![DagApp::new(0, table1_nodes(), vec![])],
        ..Workload::default()
    };
    let out = run(&w, &Platform::uniform(1), &RunConfig::new("edf".parse().unwrap(), 0)).unwrap();
    let n4 = out.report.per_task.iter().find(|r| r.task == TaskId(4)).unwrap();
    ensure(n4.finish == n4.deadline.unwrap(), || {
        "n4 should finish exactly at its deadline".into()
    })?;
    ensure(out.report.tgr == Some(1.0), || {
        format!("boundary tgr {:?}", out.report.tgr)
    })?;
    compare_reducer(&out)?;
    Ok(format!(
        "100 workloads ({tasks} tasks) match bit-exactly; f = d counts as met"
    ))
}

/// Checks that every gang starts its members together and keeps its
/// processors until its last member ends.
fn check_gang_trace(out: &RunOutput) -> Result<(), String> {
    let mut first_start: BTreeMap<AppId, BTreeMap<TaskId, Time>> = BTreeMap::new();
    let mut procs: BTreeMap<AppId, BTreeSet<ProcId>> = BTreeMap::new();
    let mut end: BTreeMap<AppId, Time> = BTreeMap::new();
    let mut starts: Vec<(Time, AppId, ProcId)> = Vec::new();
    for e in &out.trace.events {
        match &e.kind {
            EventKind::SlotStart {
                app, task, processor, ..
            } => {
                first_start.entry(*app).or_default().entry(*task).or_insert(e.time);
                procs.entry(*app).or_default().insert(*processor);
                starts.push((e.time, *app, *processor));
            }
            EventKind::SlotFinish { app, outcome, .. } if outcome.is_final() => {
                let x = end.entry(*app).or_insert(e.time);
                *x = (*x).max(e.time);
            }
            _ => {}
        }
    }
    for (app, members) in &first_start {
        let times: BTreeSet<Time> = members.values().copied().collect();
        ensure(times.len() == 1, || format!("gang {app} members start at {times:?}"))?;
        let s = *times.iter().next().unwrap();
        let e = end[app];
        for &(time, other, p) in &starts {
            if other != *app && procs[app].contains(&p) && time >= s && time < e {
                return Err(format!(
                    "gang {other} starts on {p} at {time} inside gang {app}'s window [{s}, {e})"
                ));
            }
        }
    }
    Ok(())
}

fn fig3() -> Workload {
    let gang = |id, n: usize, placement: &[u32]| {
        Gang::new(id, Time::ZERO, (0..n as u32).map(|i| Task::new(i, u(4))).collect())
            .with_placement(placement.iter().map(|&p| ProcId(p)).collect())
    };
    Workload {
        gangs: vec![gang(1, 2, &[0, 1]), gang(2, 3, &[0, 1, 2]), gang(3, 2, &[1, 2])],
        ..Workload::default()
    }
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let policies = [
        "afcfs",
        "afcfs+nobackfill",
        "afcfs+bypass:1",
        "afcfs+migrate:1",
        "lgfs",
        "edf-gang-ac:restricted",
        "edf-gang-ac:holistic",
    ];
    for i in 0..1000 {
        let p = random_platform(&mut rng, 5, false);
        let policy = policies[rng.gen_range(0..policies.len())];
        let w = Workload {
            gangs: random_gangs(&mut rng, p.len(), policy.starts_with("edf")),
            ..Workload::default()
        };
        let mut cfg = RunConfig::new(policy.parse().unwrap(), i);
        if rng.gen_bool(0.3) {
            cfg.faults = Some(FaultConfig {
                lambda: 0.3,
                checkpoint_interval: rng.gen_bool(0.5).then(|| u(1)),
                overhead: Time::ZERO,
            });
        }
        let out = run(&w, &p, &cfg).map_err(|e| format!("workload {i} ({policy}): {e}"))?;
        check_gang_trace(&out).map_err(|e| format!("workload {i} ({policy}): {e}"))?;
    }
    let out = run(
        &fig3(),
        &Platform::uniform(3),
        &RunConfig::new("afcfs".parse().unwrap(), 0),
    )
    .unwrap();
    check_gang_trace(&out)?;
    let gang1_end = out
        .report
        .per_task
        .iter()
        .filter(|r| r.app == AppId(1))
        .map(|r| r.finish)
        .max()
        .unwrap();
    let p3_busy = out.trace.events.iter().any(|e| {
        matches!(&e.kind, EventKind::SlotStart { processor, .. } if *processor == ProcId(2)) && e.time < gang1_end
    });
    ensure(!p3_busy, || "the third processor runs something during gang 1".into())?;
    Ok("1000 random gang workloads start together; third processor idle during gang 1 in the three-gang layout".into())
}

/// Straight-line Min-Min / Max-Min / Sufferage.
fn reference_mapping(etc: &[Vec<Time>], heuristic: BotHeuristic) -> Vec<(u32, usize, Time, Time)> {
    let procs = etc[0].len();
    let mut ready = vec![Time::ZERO; procs];
    let mut left: Vec<usize> = (0..etc.len()).collect();
    let mut out = Vec::new();
    while !left.is_empty() {
        let mut best: Option<(usize, usize, Time, Time)> = None;
        let mut best_key: Option<(i64, usize)> = None;
        for &i in &left {
            let mut fin: Vec<(Time, usize)> = (0..procs).map(|p| (ready[p] + etc[i][p], p)).collect();
            fin.sort();
            let (mct, p) = fin[0];
            let key = match heuristic {
                BotHeuristic::MinMin => (mct.ticks(), i),
                BotHeuristic::MaxMin => (-mct.ticks(), i),
                _ => (-(fin[1].0 - mct).ticks(), i),
            };
            if best_key.is_none_or(|b| key < b) {
                best_key = Some(key);
                best = Some((i, p, ready[p], mct));
            }
        }
        let (i, p, s, f) = best.unwrap();
        ready[p] = f;
        left.retain(|&x| x != i);
        out.push((i as u32, p, s, f));
    }
    out
}

fn optimal_makespan(etc: &[Vec<Time>]) -> Time {
    let procs = etc[0].len();
    let mut best = Time::MAX;
    let combos = procs.pow(etc.len() as u32);
    for mut code in 0..combos {
        let mut load = vec![Time::ZERO; procs];
        for row in etc {
            load[code % procs] += row[code % procs];
            code /= procs;
        }
        best = best.min(load.into_iter().max().unwrap());
    }
    best
}

fn criterion_4() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..500 {
        let tasks = rng.gen_range(1..=5);
        let procs = rng.gen_range(1..=3);
        let bot = BotApp::from_matrix(0, &random_etc(&mut rng, tasks, procs));
        let opt = optimal_makespan(&bot.etc);
        for h in [BotHeuristic::MinMin, BotHeuristic::MaxMin, BotHeuristic::Sufferage] {
            let got = map_from(&bot, h, vec![Time::ZERO; procs]);
            if h == BotHeuristic::Sufferage && procs < 2 {
                ensure(matches!(got, Err(Error::NeedTwoProcessors)), || {
                    format!("instance {i}: sufferage on one processor")
                })?;
                continue;
            }
            let m = got.map_err(|e| format!("instance {i} {h}: {e}"))?;
            let mine: Vec<(u32, usize, Time, Time)> = m
                .assignments
                .iter()
                .map(|a| (a.task.0, a.processor, a.start, a.finish))
                .collect();
            let reference = reference_mapping(&bot.etc, h);
            ensure(mine == reference, || {
                format!("instance {i} {h}: {mine:?} vs reference {reference:?}")
            })?;
            ensure(m.makespan >= opt, || {
                format!("instance {i} {h}: makespan {} below optimum {opt}", m.makespan)
            })?;
        }
    }
    let bot = BotApp::from_matrix(0, &[vec![3.0, 5.0], vec![2.0, 4.0]]);
    let p = Platform::uniform(2);
    let (mm, xm) = (min_min(&bot, &p).unwrap().makespan, max_min(&bot, &p).unwrap().makespan);
    ensure(mm == u(5) && xm == u(4), || {
        format!("2x2 instance: Min-Min {mm}, Max-Min {xm}")
    })?;
    let _ = sufferage(&bot, &p).unwrap();
    let elapsed = started.elapsed();
    ensure(elapsed.as_secs_f64() <= 10.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "500 ETC instances match references and bound the optimum; 2x2 gives 5 vs 4 ({elapsed:?})"
    ))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let policies = [
        DagPolicy::Hlf,
        DagPolicy::Ish,
        DagPolicy::Heft,
        DagPolicy::Dsc,
        DagPolicy::Dsh,
        DagPolicy::Sa(SaParams {
            initial_temperature: 5.0,
            cooling_rate: 0.7,
            iters_per_temp: 4,
            seed: 0,
        }),
        DagPolicy::Ga(GaParams {
            population: 6,
            generations: 4,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            seed: 0,
        }),
        DagPolicy::Lstf,
    ];
    let mut dup_steps = 0;
    for i in 0..1000 {
        let p = random_platform(&mut rng, 3, true);
        let app = random_dag(&mut rng, 1, 10);
        let dag = validate_dag(app.clone()).map_err(|e| format!("dag {i}: {e}"))?;
        for policy in &policies {
            let s = policy
                .plan(&dag, &mut Timelines::new(&p), i)
                .map_err(|e| format!("dag {i} {policy}: {e}"))?;
            validate_schedule(&dag, &p, &s).map_err(|e| format!("dag {i} {policy}: {e}"))?;
            check_schedule(&app, &p, &s.slots).map_err(|e| format!("dag {i} {policy}, test validator: {e}"))?;
        }
        let (_, log) = dsh_with_log(&dag, &p);
        for step in &log {
            dup_steps += 1;
            ensure(step.start_after < step.start_before, || {
                format!("dag {i}: duplication step {step:?} does not improve")
            })?;
        }
        // planning onto busy timelines leaves the existing slots in place
        let mut tl = Timelines::new(&p);
        DagPolicy::Heft.plan(&dag, &mut tl, i).unwrap();
        let before = tl.all_slots();
        let second = validate_dag(random_dag_with_task_deadlines(&mut rng, 2, 6)).unwrap();
        let policy = if i % 2 == 0 {
            DagPolicy::Ish
        } else {
            DagPolicy::EdfAc([AcVariant::FirstFit, AcVariant::BestFit, AcVariant::WorstFit][i as usize % 3])
        };
        policy
            .plan(&second, &mut tl, i)
            .map_err(|e| format!("dag {i} {policy}: {e}"))?;
        let after = tl.all_slots();
        ensure(before.iter().all(|s| after.contains(s)), || {
            format!("dag {i}: {policy} moved an existing slot")
        })?;
    }
    Ok(format!(
        "1000 DAGs valid under 8 schedulers; insertion keeps slots; {dup_steps} duplication steps all improve"
    ))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut merges = 0;
    for i in 0..200 {
        let p = random_platform(&mut rng, 4, false);
        let dag = validate_dag(random_dag(&mut rng, 0, 10)).unwrap();
        let c = dsc(&dag, &p);
        merges += c.ds_history.len().saturating_sub(1);
        ensure(c.ds_history.windows(2).all(|w| w[1] <= w[0]), || {
            format!("dag {i}: DS history {:?}", c.ds_history)
        })?;
        validate_schedule(&dag, &p, &c.schedule).map_err(|e| format!("dag {i}: {e}"))?;
    }
    let chain = validate_dag(DagApp::new(
        0,
        vec![Task::new(0, u(1)), Task::new(1, u(1))],
        vec![Edge::new(0, 1, u(10))],
    ))
    .unwrap();
    let c = dsc(&chain, &Platform::uniform(2));
    ensure(c.ds_history == vec![u(12), u(2)], || {
        format!("chain DS history {:?}", c.ds_history)
    })?;
    Ok(format!(
        "DS nonincreasing over {merges} accepted merges on 200 DAGs; chain 12 -> 2"
    ))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let mut terminations = 0;
    for i in 0..300 {
        let p = random_platform(&mut rng, 4, false);
        let k = [t(0.5), u(1), u(2)][rng.gen_range(0..3)];
        let overhead = if rng.gen_bool(0.3) { t(0.1) } else { Time::ZERO };
        let (w, policy) = if i % 3 == 2 {
            let dags = vec![random_dag(&mut rng, 0, 8)];
            let w = Workload {
                dags,
                ..Workload::default()
            };
            (w, "heft")
        } else {
            let policy = ["edf-gang-ac:restricted", "edf-gang-ac:holistic", "afcfs"]
                [i % 3 + rng.gen_range(0..2) * (2 - i % 3) / 2];
            let w = Workload {
                gangs: random_gangs(&mut rng, p.len(), true),
                ..Workload::default()
            };
            (w, policy)
        };
        let mut cfg = RunConfig::new(policy.parse().unwrap(), i as u64);
        cfg.faults = Some(FaultConfig {
            lambda: rng.gen_range(0.05..0.6),
            checkpoint_interval: Some(k),
            overhead,
        });
        let out = run(&w, &p, &cfg).map_err(|e| format!("case {i}: {e}"))?;
        let min_cost: BTreeMap<(AppId, TaskId), Time> = out
            .report
            .per_task
            .iter()
            .map(|r| ((r.app, r.task), r.min_cost))
            .collect();
        for (idx, e) in out.trace.events.iter().enumerate() {
            if let EventKind::Failure {
                member_loss,
                terminated,
                app,
                ..
            } = &e.kind
            {
                failures += 1;
                for &l in member_loss {
                    ensure(l <= k + Time::RESOLUTION, || {
                        format!("case {i}: lost {l} with interval {k}")
                    })?;
                }
                if *terminated {
                    terminations += 1;
                    ensure(policy == "edf-gang-ac:restricted", || {
                        format!("case {i}: {policy} terminated on failure")
                    })?;
                    for later in &out.trace.events[idx + 1..] {
                        if later.time != e.time {
                            break;
                        }
                        if let EventKind::SlotFinish {
                            app: a,
                            task,
                            executed,
                            outcome,
                            ..
                        } = &later.kind
                        {
                            if Some(*a) == *app {
                                let min = min_cost[&(*a, *task)];
                                ensure(*executed >= min && *outcome != Outcome::Missed, || {
                                    format!("case {i}: terminated with {executed} below mandatory {min}")
                                })?;
                            }
                        }
                    }
                }
            }
        }
        let mut plain = cfg.clone();
        plain.faults = None;
        let no_faults = run(&w, &p, &plain).unwrap();
        let mut zero = cfg.clone();
        zero.faults = Some(FaultConfig {
            lambda: 0.0,
            checkpoint_interval: None,
            overhead: Time::ZERO,
        });
        let zero_rate = run(&w, &p, &zero).unwrap();
        ensure(zero_rate.trace.hash() == no_faults.trace.hash(), || {
            format!("case {i}: zero rate differs from no faults")
        })?;
        zero.faults = Some(FaultConfig {
            lambda: 0.0,
            checkpoint_interval: Some(k),
            overhead: Time::ZERO,
        });
        let ckpt_only = run(&w, &p, &zero).unwrap();
        ensure(ckpt_only.report.per_task == no_faults.report.per_task, || {
            format!("case {i}: checkpointing alone changed the outcome")
        })?;
    }
    ensure(failures > 0 && terminations > 0, || {
        format!("{failures} failures, {terminations} terminations")
    })?;
    Ok(format!(
        "{failures} failures within one interval of loss; {terminations} restricted terminations all past the mandatory part; zero rate matches no faults"
    ))
}

fn criterion_8() -> Check {
    let platform = periodic_platform();
    let mut sets = 0;
    for p1 in 1..=8i64 {
        for p2 in p1..=8i64 {
            for m1 in 1..=p1 {
                for m2 in 1..=p2 {
                    if m1 * p2 + m2 * p1 > p1 * p2 {
                        continue;
                    }
                    for o1 in 0..=2 {
                        for o2 in 0..=2 {
                            sets += 1;
                            let w = Workload {
                                periodic: vec![
                                    PeriodicTask::new(1, u(p1), u(m1), u(o1)).with_actual_cost_factor(0.5),
                                    PeriodicTask::new(2, u(p2), u(m2), u(o2)).with_actual_cost_factor(0.75),
                                ],
                                ..Workload::default()
                            };
                            let mut energies = Vec::new();
                            for energy in [EnergyPolicy::None, EnergyPolicy::SlackReclaim, EnergyPolicy::MfedCcrt] {
                                let mut cfg = RunConfig::new("mfed".parse().unwrap(), 0);
                                cfg.energy = energy;
                                let out = run(&w, &platform, &cfg).map_err(|e| format!("{p1},{p2},{m1},{m2}: {e}"))?;
                                ensure(out.report.mandatory_misses == 0, || {
                                    format!("periods {p1},{p2} mandatory {m1},{m2} optional {o1},{o2}: {energy} missed")
                                })?;
                                energies.push(out.report.energy_joules);
                            }
                            ensure(
                                energies[1] <= energies[0] + 1e-9 && energies[2] <= energies[0] + 1e-9,
                                || {
                                    format!("periods {p1},{p2} mandatory {m1},{m2} optional {o1},{o2}: energies {energies:?}")
                                },
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "{sets} two-task sets: scaled energy never above the full-speed baseline, no mandatory misses"
    ))
}

fn criterion_9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let workload = dir.path().join("w.json");
    let w = Workload {
        gangs: random_gangs(&mut ChaCha8Rng::seed_from_u64(9), 3, true),
        ..Workload::default()
    };
    std::fs::write(&workload, w.to_json()).unwrap();
    let mut hashes = Vec::new();
    for (policy, source) in [("edf-gang-ac:restricted", Some(workload.clone())), ("heft", None)] {
        let mut outs = Vec::new();
        for attempt in 0..2 {
            let cfg = ExperimentConfig {
                platform: None,
                procs: 3,
                workload: source.clone(),
                generator: source
                    .is_none()
                    .then(|| "dag:count=4,layers=3,fanout=2,cost=exp:3,arrival=poisson:0.5".to_string()),
                policy: policy.into(),
                faults: Some(FaultConfig {
                    lambda: 0.2,
                    checkpoint_interval: Some(u(1)),
                    overhead: Time::ZERO,
                }),
                energy: "none".into(),
                seeds: vec![1, 2, 3],
                out: dir.path().join(format!("{policy}-{attempt}")),
                format: Format::Json,
                trace: true,
            };
            let summary = cmd_run(&cfg).map_err(|e| e.to_string())?;
            outs.push((
                summary.reports.iter().map(|r| r.trace_hash.clone()).collect::<Vec<_>>(),
                cfg.out,
            ));
        }
        ensure(outs[0].0 == outs[1].0, || format!("{policy}: hashes differ"))?;
        for seed in 1..=3 {
            for file in ["trace.jsonl", "metrics.json", "metrics.csv"] {
                let a = std::fs::read(outs[0].1.join(format!("seed-{seed}/{file}"))).unwrap();
                let b = std::fs::read(outs[1].1.join(format!("seed-{seed}/{file}"))).unwrap();
                ensure(a == b, || format!("{policy} seed {seed}: {file} differs"))?;
            }
        }
        hashes.extend(outs.swap_remove(0).0);
    }
    Ok(format!("{} seeded runs reproduce byte-identical outputs", hashes.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("baseline and admission scenario", criterion_1),
        ("metrics oracle", criterion_2),
        ("gang simultaneity", criterion_3),
        ("brute-force BoT equivalence", criterion_4),
        ("DAG schedule validity", criterion_5),
        ("DSC monotonicity", criterion_6),
        ("checkpointing", criterion_7),
        ("energy", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
