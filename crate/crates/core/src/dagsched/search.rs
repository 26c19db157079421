use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::platform::{Platform, Timeline, Timelines};
use crate::time::Time;
use crate::workload::Dag;

use super::list::{decode_on, hlf_on};
use super::DagSchedule;

#[derive(Clone, Debug, PartialEq)]
pub struct SaParams {
    /// Starting temperature, in time units of schedule length.
    pub initial_temperature: f64,
    /// Factor applied to the temperature after each round, in (0, 1).
    pub cooling_rate: f64,
    pub iters_per_temp: usize,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            initial_temperature: 10.0,
            cooling_rate: 0.9,
            iters_per_temp: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 20,
            generations: 30,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            seed: 0,
        }
    }
}

/// A candidate solution: processor index and priority key per task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chromosome {
    pub assignment: Vec<usize>,
    pub keys: Vec<i64>,
}

/// Schedule length objective: latest finish.
fn evaluate(dag: &Dag, base: &[Timeline], c: &Chromosome) -> Time {
    decode_on(dag, &mut base.to_vec(), &c.assignment, &c.keys).finish()
}

fn from_schedule(dag: &Dag, tl: &[Timeline], s: &DagSchedule) -> Chromosome {
    let mut assignment = Vec::with_capacity(dag.len());
    let mut keys = Vec::with_capacity(dag.len());
    for t in dag.tasks() {
        let slot = s.primary(t.id).expect("every task scheduled");
        assignment.push(
            tl.iter()
                .position(|x| x.processor == slot.processor)
                .expect("known processor"),
        );
        keys.push(slot.start.ticks());
    }
    Chromosome { assignment, keys }
}

pub(crate) fn sa_on(dag: &Dag, tl: &mut [Timeline], params: &SaParams) -> DagSchedule {
    let base = tl.to_vec();
    let initial = hlf_on(dag, &mut base.clone());
    let mut cur = from_schedule(dag, &base, &initial);
    let mut cur_obj = initial.finish();
    let mut best = (cur.clone(), cur_obj);
    let n = dag.len();
    let procs = tl.len();
    let can_move = procs > 1 || n > 1;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut temp = params.initial_temperature;
    let stop = params.initial_temperature * 1e-3;
    while params.iters_per_temp > 0 && can_move && temp >= stop {
        for _ in 0..params.iters_per_temp {
            let mut next = cur.clone();
            if procs > 1 && (n < 2 || rng.gen_bool(0.5)) {
                let i = rng.gen_range(0..n);
                let shift = rng.gen_range(1..procs);
                next.assignment[i] = (next.assignment[i] + shift) % procs;
            } else {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                next.keys.swap(a, b);
            }
            let obj = evaluate(dag, &base, &next);
            let delta = (obj - cur_obj).as_f64();
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                cur = next;
                cur_obj = obj;
                if cur_obj < best.1 {
                    best = (cur.clone(), cur_obj);
                }
            }
        }
        temp *= params.cooling_rate;
    }
    decode_on(dag, tl, &best.0.assignment, &best.0.keys)
}

/// Simulated annealing over processor assignments and priority orders,
/// starting from the HLF schedule. Neighbors move one task to another
/// processor or swap the priorities of two tasks; a worse neighbor is
/// accepted with probability `exp(-delta / T)`. Returns the best schedule
/// seen.
pub fn sa(dag: &Dag, platform: &Platform, params: &SaParams) -> DagSchedule {
    sa_on(dag, &mut Timelines::new(platform).0, params)
}

/// Population state of the genetic search, advanced one generation at a
/// time.
pub struct GaState<'a> {
    dag: &'a Dag,
    base: Vec<Timeline>,
    params: GaParams,
    rng: ChaCha8Rng,
    population: Vec<(Chromosome, Time)>,
    best_history: Vec<Time>,
}

impl<'a> GaState<'a> {
    pub fn new(dag: &'a Dag, platform: &Platform, params: &GaParams) -> Self {
        Self::on(dag, Timelines::new(platform).0, params)
    }

    fn on(dag: &'a Dag, base: Vec<Timeline>, params: &GaParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let procs = base.len();
        let pop: Vec<Chromosome> = (0..params.population.max(2))
            .map(|_| Chromosome {
                assignment: (0..dag.len()).map(|_| rng.gen_range(0..procs)).collect(),
                keys: (0..dag.len()).map(|_| rng.gen_range(0..1i64 << 32)).collect(),
            })
            .collect();
        Self::with_rng(dag, base, params, rng, pop)
    }

    /// Starts from a given population.
    pub fn from_population(dag: &'a Dag, platform: &Platform, params: &GaParams, population: Vec<Chromosome>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Self::with_rng(dag, Timelines::new(platform).0, params, rng, population)
    }

    fn with_rng(dag: &'a Dag, base: Vec<Timeline>, params: &GaParams, rng: ChaCha8Rng, pop: Vec<Chromosome>) -> Self {
        let population: Vec<(Chromosome, Time)> = pop
            .into_iter()
            .map(|c| {
                let f = evaluate(dag, &base, &c);
                (c, f)
            })
            .collect();
        let mut s = GaState {
            dag,
            base,
            params: params.clone(),
            rng,
            population,
            best_history: Vec::new(),
        };
        s.best_history.push(s.best().1);
        s
    }

    pub fn population(&self) -> impl Iterator<Item = &Chromosome> {
        self.population.iter().map(|(c, _)| c)
    }

    /// Best chromosome and its schedule length; ties go to the earlier
    /// member.
    pub fn best(&self) -> (&Chromosome, Time) {
        let (c, f) = self
            .population
            .iter()
            .enumerate()
            .min_by_key(|(i, (_, f))| (*f, *i))
            .map(|(_, x)| x)
            .expect("population is nonempty");
        (c, *f)
    }

    /// Best schedule length after each generation, starting with the
    /// initial population.
    pub fn best_history(&self) -> &[Time] {
        &self.best_history
    }

    fn tournament(&mut self) -> usize {
        let n = self.population.len();
        let a = self.rng.gen_range(0..n);
        let b = self.rng.gen_range(0..n);
        if (self.population[b].1, b) < (self.population[a].1, a) {
            b
        } else {
            a
        }
    }

    /// Elitism keeps the best member; the rest are children of binary
    /// tournament winners, crossed over at a single point of the assignment
    /// vector and mutated by random reassignment.
    pub fn next_generation(&mut self) {
        let n = self.dag.len();
        let procs = self.base.len();
        let size = self.population.len();
        let elite = self.best().0.clone();
        let elite_fit = self.best().1;
        let mut next = vec![(elite, elite_fit)];
        while next.len() < size {
            let a = self.tournament();
            let b = self.tournament();
            let mut child = self.population[a].0.clone();
            if n > 1 && self.rng.gen_bool(self.params.crossover_rate) {
                let cut = self.rng.gen_range(1..n);
                child.assignment[cut..].copy_from_slice(&self.population[b].0.assignment[cut..]);
            }
            for g in child.assignment.iter_mut() {
                if self.rng.gen_bool(self.params.mutation_rate) {
                    *g = self.rng.gen_range(0..procs);
                }
            }
            let f = evaluate(self.dag, &self.base, &child);
            next.push((child, f));
        }
        self.population = next;
        self.best_history.push(self.best().1);
    }

    pub fn run(&mut self) {
        for _ in 0..self.params.generations {
            self.next_generation();
        }
    }
}

pub(crate) fn ga_on(dag: &Dag, tl: &mut [Timeline], params: &GaParams) -> DagSchedule {
    let mut state = GaState::on(dag, tl.to_vec(), params);
    state.run();
    let best = state.best().0.clone();
    decode_on(dag, tl, &best.assignment, &best.keys)
}

/// Genetic search over (assignment, priority) chromosomes with fitness the
/// inverse schedule length.
pub fn ga(dag: &Dag, platform: &Platform, params: &GaParams) -> DagSchedule {
    ga_on(dag, &mut Timelines::new(platform).0, params)
}
