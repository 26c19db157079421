mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use schedarena::engine::{run, EventKind, Outcome, RunConfig};
use schedarena::gangsched::{lgfs_dispatch, GangDispatchState, GangPolicy};
use schedarena::ids::AppId;
use schedarena::platform::Platform;
use schedarena::time::Time;
use schedarena::workload::{Gang, Task, Workload};

fn distinct(members: &[(schedarena::ids::TaskId, usize)]) -> bool {
    members.iter().map(|m| m.1).collect::<BTreeSet<_>>().len() == members.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn queues_and_counters_stay_consistent(
        seed in any::<u64>(),
        policy in prop::sample::select(vec![
            "afcfs", "afcfs+bypass:1", "afcfs+migrate:1", "afcfs+bypass:2+migrate:3", "afcfs+nobackfill", "lgfs",
        ]),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy: GangPolicy = policy.parse().unwrap();
        let procs = rng.gen_range(1..=5);
        let platform = Platform::uniform(procs);
        let mut state = GangDispatchState::new(procs);
        policy.configure(&mut state);
        let mut running: Vec<AppId> = Vec::new();
        for g in random_gangs(&mut rng, procs, false) {
            state.admit(&g, &platform).unwrap();
            prop_assert!(distinct(&state.waiting_gang(g.id).unwrap().members));
            if !running.is_empty() && rng.gen_bool(0.5) {
                let done = running.remove(rng.gen_range(0..running.len()));
                state.release(done);
            }
            let (_, started) = policy.dispatch(&mut state, Time::ZERO);
            for d in started {
                prop_assert!(distinct(&d.members));
                for &(_, p) in &d.members {
                    prop_assert_eq!(state.running_on(p), Some(d.gang));
                }
                running.push(d.gang);
            }
            for w in state.waiting() {
                prop_assert!(distinct(&w.members));
            }
            if let GangPolicy::Afcfs { migrate: Some(limit), .. } = policy {
                for p in 0..procs {
                    prop_assert!(state.accepted_migrations(p) <= limit);
                }
            }
        }
    }

    #[test]
    fn lgfs_never_passes_over_a_larger_gang(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let procs = rng.gen_range(2..=6);
        let platform = Platform::uniform(procs);
        let mut state = GangDispatchState::new(procs);
        for g in random_gangs(&mut rng, procs, false) {
            state.admit(&g, &platform).unwrap();
        }
        let before: Vec<_> = state.waiting().cloned().collect();
        let started = lgfs_dispatch(&mut state, Time::ZERO);
        let size: BTreeMap<AppId, usize> = started.iter().map(|d| (d.gang, d.members.len())).collect();
        for g in before.iter().filter(|g| !size.contains_key(&g.id)) {
            let procs_of: BTreeSet<usize> = g.members.iter().map(|m| m.1).collect();
            let blocker = started
                .iter()
                .filter(|d| d.members.iter().any(|m| procs_of.contains(&m.1)))
                .map(|d| d.members.len())
                .max();
            prop_assert!(blocker.is_some_and(|b| b >= g.size()), "gang {} of size {} passed over", g.id, g.size());
        }
    }

    #[test]
    fn holistic_runs_exactly_the_mandatory_part(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let platform = random_platform(&mut rng, 4, false);
        let w = Workload { gangs: random_gangs(&mut rng, platform.len(), true), ..Workload::default() };
        let out = run(&w, &platform, &RunConfig::new("edf-gang-ac:holistic".parse().unwrap(), seed)).unwrap();
        for r in &out.report.per_task {
            if r.outcome != Outcome::Missed {
                prop_assert_eq!(r.executed, r.min_cost);
            }
        }
    }

    #[test]
    fn gang_window_is_its_longest_member(seed in any::<u64>(), lgfs in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let platform = random_platform(&mut rng, 4, false);
        let w = Workload { gangs: random_gangs(&mut rng, platform.len(), false), ..Workload::default() };
        let policy = if lgfs { "lgfs" } else { "afcfs" };
        let out = run(&w, &platform, &RunConfig::new(policy.parse().unwrap(), seed)).unwrap();
        let mut start: BTreeMap<AppId, Time> = BTreeMap::new();
        let mut end: BTreeMap<AppId, Time> = BTreeMap::new();
        for e in &out.trace.events {
            match &e.kind {
                EventKind::SlotStart { app, .. } => {
                    start.entry(*app).or_insert(e.time);
                }
                EventKind::SlotFinish { app, .. } => {
                    end.insert(*app, e.time);
                }
                _ => {}
            }
        }
        for g in &w.gangs {
            let longest = g.tasks.iter().map(|t| t.cost).max().unwrap();
            prop_assert_eq!(end[&g.id] - start[&g.id], longest);
        }
    }

    #[test]
    fn uncontended_gangs_start_in_arrival_order(sizes in prop::collection::vec(1usize..=3, 1..8), gaps in prop::collection::vec(1i64..3, 8)) {
        // every gang needs all processors, so none can overtake another
        let procs = 3;
        let mut arrival = Time::ZERO;
        let gangs: Vec<Gang> = sizes
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                arrival += u(gaps[i]);
                let tasks = (0..procs).map(|k| Task::new(k, u(len as i64)).with_arrival(arrival)).collect();
                Gang::new((sizes.len() - i) as u32, arrival, tasks)
            })
            .collect();
        let w = Workload { gangs: gangs.clone(), ..Workload::default() };
        let out = run(&w, &Platform::uniform(procs as usize), &RunConfig::new("afcfs".parse().unwrap(), 0)).unwrap();
        let mut order = Vec::new();
        for e in &out.trace.events {
            if let EventKind::SlotStart { app, .. } = &e.kind {
                if order.last() != Some(app) {
                    order.push(*app);
                }
            }
        }
        let want: Vec<AppId> = gangs.iter().map(|g| g.id).collect();
        prop_assert_eq!(order, want);
    }
}
