mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use schedarena::botsched::{caees_select, map_from, BotHeuristic, CloudState, MappingState, Tier};
use schedarena::ids::TaskId;
use schedarena::platform::Platform;
use schedarena::time::Time;
use schedarena::workload::BotApp;

/// Lowest tier that admits a task, worked out from the VM states directly.
fn lowest_tier(cloud: &CloudState, etc: &[Time], deadline: Time, now: Time) -> Option<Tier> {
    let busy = |v: usize| cloud.vms[v].busy_until > now;
    let mut best: Option<Tier> = None;
    for (v, vm) in cloud.vms.iter().enumerate() {
        let start = vm.busy_until.max(now);
        let fits = |f: f64| start + etc[v].div_rate(f) <= deadline;
        let tier = if busy(v) {
            if fits(vm.frequency) {
                Some(Tier::A)
            } else if vm.levels.iter().any(|&f| f > vm.frequency && fits(f)) {
                Some(Tier::B)
            } else {
                None
            }
        } else if !vm.levels.iter().any(|&f| fits(f)) {
            None
        } else if (0..cloud.vms.len()).any(|w| w != v && cloud.vms[w].host == vm.host && busy(w)) {
            Some(Tier::C)
        } else {
            Some(Tier::D)
        };
        if let Some(t) = tier {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn every_task_assigned_once_and_loads_grow(
        seed in any::<u64>(),
        h in prop::sample::select(vec![BotHeuristic::MinMin, BotHeuristic::MaxMin, BotHeuristic::Sufferage]),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tasks = rng.gen_range(1..=8);
        let procs = rng.gen_range(2..=4);
        let bot = BotApp::from_matrix(0, &random_etc(&mut rng, tasks, procs));
        let ready: Vec<Time> = (0..procs).map(|_| u(rng.gen_range(0..5))).collect();
        let m = map_from(&bot, h, ready.clone()).unwrap();
        let mut ids: Vec<u32> = m.assignments.iter().map(|a| a.task.0).collect();
        ids.sort();
        prop_assert_eq!(ids, (0..tasks as u32).collect::<Vec<_>>());
        let mut load = ready.clone();
        for a in &m.assignments {
            prop_assert_eq!(a.start, load[a.processor]);
            prop_assert_eq!(a.finish - a.start, bot.etc[a.task.0 as usize][a.processor]);
            prop_assert!(a.finish >= load[a.processor]);
            load[a.processor] = a.finish;
        }
        prop_assert_eq!(m.makespan, m.assignments.iter().map(|a| a.finish).max().unwrap());
    }

    #[test]
    fn min_min_step_takes_the_global_minimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tasks = rng.gen_range(1..=6);
        let procs = rng.gen_range(1..=3);
        let bot = BotApp::from_matrix(0, &random_etc(&mut rng, tasks, procs));
        let mut state = MappingState::new(tasks, vec![Time::ZERO; procs]);
        while !state.unassigned.is_empty() {
            let best = state
                .unassigned
                .iter()
                .flat_map(|&i| (0..procs).map(move |p| (i, p)))
                .map(|(i, p)| state.ready[p] + bot.etc[i][p])
                .min()
                .unwrap();
            state.step(&bot, BotHeuristic::MinMin).unwrap();
            prop_assert_eq!(state.log.last().unwrap().finish, best);
        }
    }

    #[test]
    fn caees_picks_the_lowest_feasible_tier(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let procs = rng.gen_range(1..=4u32);
        let split = rng.gen_range(1..=procs);
        let groups: Vec<Vec<u32>> = [(0..split).collect::<Vec<_>>(), (split..procs).collect()]
            .into_iter()
            .filter(|g| !g.is_empty())
            .collect();
        let platform = Platform::uniform(procs as usize)
            .with_levels(&[0.4, 0.6, 0.8, 1.0])
            .unwrap()
            .with_hosts(&groups)
            .unwrap();
        let mut cloud = CloudState::new(&platform);
        let now = u(rng.gen_range(0..5));
        for vm in &mut cloud.vms {
            vm.busy_until = u(rng.gen_range(0..10));
            vm.frequency = [0.4, 0.6, 0.8, 1.0][rng.gen_range(0..4)];
        }
        let etc: Vec<Time> = (0..procs).map(|_| u(rng.gen_range(1..6))).collect();
        let deadline = now + u(rng.gen_range(1..15));
        let want = lowest_tier(&cloud, &etc, deadline, now);
        match caees_select(TaskId(0), &cloud, &etc, deadline, now) {
            Ok(choice) => {
                prop_assert_eq!(Some(choice.tier), want);
                prop_assert!(choice.finish <= deadline);
                prop_assert!(choice.start >= now);
            }
            Err(_) => prop_assert_eq!(want, None),
        }
    }
}
