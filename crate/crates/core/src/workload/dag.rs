use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::ids::{AppId, TaskId};
use crate::time::Time;

use super::{DagApp, Task};

/// A validated task graph with index-based adjacency.
///
/// Tasks are addressed by their position in `nodes`; ids are only used at the
/// API boundary and for tie-breaking.
#[derive(Clone, Debug)]
pub struct Dag {
    app: DagApp,
    index: HashMap<TaskId, usize>,
    parents: Vec<Vec<(usize, Time)>>,
    children: Vec<Vec<(usize, Time)>>,
    topo: Vec<usize>,
    levels: Vec<Time>,
}

/// Checks every graph invariant and builds the adjacency structure.
pub fn validate_dag(app: DagApp) -> Result<Dag> {
    if app.nodes.is_empty() {
        return Err(Error::NoEntryOrExit);
    }
    let mut index = HashMap::with_capacity(app.nodes.len());
    for (i, t) in app.nodes.iter().enumerate() {
        t.validate()?;
        if index.insert(t.id, i).is_some() {
            return Err(Error::DuplicateTask(t.id));
        }
    }
    let n = app.nodes.len();
    let mut parents = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    let mut seen = HashSet::new();
    for e in &app.edges {
        let (Some(&u), Some(&v)) = (index.get(&e.from), index.get(&e.to)) else {
            return Err(Error::DanglingEdge { from: e.from, to: e.to });
        };
        if u == v {
            return Err(Error::CycleDetected(e.from));
        }
        if e.comm.is_negative() {
            return Err(Error::InvalidConfig(format!(
                "edge {} -> {} has negative communication cost",
                e.from, e.to
            )));
        }
        if !seen.insert((u, v)) {
            return Err(Error::DuplicateEdge { from: e.from, to: e.to });
        }
        children[u].push((v, e.comm));
        parents[v].push((u, e.comm));
    }
    for list in parents.iter_mut().chain(children.iter_mut()) {
        list.sort_by_key(|&(i, _)| app.nodes[i].id);
    }

    // Kahn's algorithm, smallest id first, for a deterministic order.
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<(TaskId, usize)>> = indeg
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(i, _)| Reverse((app.nodes[i].id, i)))
        .collect();
    if ready.is_empty() {
        let smallest = app.nodes.iter().map(|t| t.id).min().expect("nonempty");
        return Err(Error::CycleDetected(smallest));
    }
    let mut topo = Vec::with_capacity(n);
    while let Some(Reverse((_, u))) = ready.pop() {
        topo.push(u);
        for &(v, _) in &children[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(Reverse((app.nodes[v].id, v)));
            }
        }
    }
    if topo.len() != n {
        let stuck = (0..n)
            .filter(|&i| indeg[i] > 0)
            .map(|i| app.nodes[i].id)
            .min()
            .expect("cycle leaves nodes");
        return Err(Error::CycleDetected(stuck));
    }
    if !children.iter().any(Vec::is_empty) {
        return Err(Error::NoEntryOrExit);
    }

    let costs: Vec<Time> = app.nodes.iter().map(|t| t.cost).collect();
    let mut dag = Dag {
        app,
        index,
        parents,
        children,
        topo,
        levels: Vec::new(),
    };
    dag.levels = weighted_levels(&dag, &costs, |c| c);
    Ok(dag)
}

/// Level of every task under custom node and edge weights: the longest
/// weighted path from the task to an exit, inclusive of the task itself.
pub fn weighted_levels(dag: &Dag, node_weight: &[Time], edge_weight: impl Fn(Time) -> Time) -> Vec<Time> {
    let mut level = vec![Time::ZERO; dag.len()];
    for &u in dag.topo.iter().rev() {
        let tail = dag.children[u]
            .iter()
            .map(|&(v, c)| edge_weight(c) + level[v])
            .max()
            .unwrap_or(Time::ZERO);
        level[u] = node_weight[u] + tail;
    }
    level
}

/// Longest computation-plus-communication path from `task` to an exit task.
pub fn task_level(dag: &Dag, task: TaskId) -> Result<Time> {
    Ok(dag.levels[dag.idx(task)?])
}

/// Longest entry-to-exit path. Among equally long paths the lexicographically
/// smallest id sequence is returned.
pub fn critical_path(dag: &Dag) -> (Vec<TaskId>, Time) {
    let id = |i: usize| dag.task(i).id;
    let length = dag
        .entries()
        .map(|i| dag.levels[i])
        .max()
        .expect("validated dag has entries");
    let mut cur = dag
        .entries()
        .filter(|&i| dag.levels[i] == length)
        .min_by_key(|&i| id(i))
        .expect("some entry attains the maximum");
    let mut path = vec![id(cur)];
    loop {
        let rest = dag.levels[cur] - dag.task(cur).cost;
        let next = dag.children[cur]
            .iter()
            .filter(|&&(v, c)| c + dag.levels[v] == rest)
            .map(|&(v, _)| v)
            .min_by_key(|&v| id(v));
        match next {
            Some(v) => {
                path.push(id(v));
                cur = v;
            }
            None => break,
        }
    }
    (path, length)
}

impl Dag {
    pub fn app(&self) -> &DagApp {
        &self.app
    }

    pub fn id(&self) -> AppId {
        self.app.id
    }

    pub fn deadline(&self) -> Option<Time> {
        self.app.deadline
    }

    pub fn arrival(&self) -> Time {
        self.app.arrival
    }

    pub fn len(&self) -> usize {
        self.app.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.app.nodes.is_empty()
    }

    pub fn task(&self, i: usize) -> &Task {
        &self.app.nodes[i]
    }

    pub fn tasks(&self) -> &[Task] {
        &self.app.nodes
    }

    pub fn idx(&self, id: TaskId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownTask(id))
    }

    /// `(parent index, communication cost)` pairs, ordered by parent id.
    pub fn parents(&self, i: usize) -> &[(usize, Time)] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[(usize, Time)] {
        &self.children[i]
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn entries(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.parents[i].is_empty())
    }

    pub fn exits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.children[i].is_empty())
    }

    /// Level by index.
    pub fn level(&self, i: usize) -> Time {
        self.levels[i]
    }

    pub fn levels(&self) -> &[Time] {
        &self.levels
    }

    /// Earliest start of a task regardless of its predecessors.
    pub fn release(&self, i: usize) -> Time {
        self.app.arrival.max(self.task(i).release())
    }

    /// Smallest input-error limit among the children of `i` (1 for exits).
    pub fn child_error_limit(&self, i: usize) -> f64 {
        self.children[i]
            .iter()
            .map(|&(c, _)| self.task(c).input_error_limit)
            .fold(1.0, f64::min)
    }
}
