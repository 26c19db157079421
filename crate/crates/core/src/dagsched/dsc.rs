use serde::{Deserialize, Serialize};

use crate::ids::{ProcId, TaskId};
use crate::platform::{Platform, Timeline, Timelines};
use crate::time::Time;
use crate::workload::Dag;

use super::list::{decode_on, level_rank};
use super::DagSchedule;

/// Result of dominant-sequence clustering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Clustering {
    /// Task ids of each cluster, in execution order.
    pub clusters: Vec<Vec<TaskId>>,
    /// Processor of each cluster.
    pub processors: Vec<ProcId>,
    /// Dominant-sequence length before any merge and after each accepted
    /// merge.
    pub ds_history: Vec<Time>,
    pub schedule: DagSchedule,
}

/// Length of the longest path through the clustered graph: tasks of one
/// cluster run one after another in descending level order on a dedicated
/// unit-speed processor, and edges inside a cluster cost nothing.
pub fn dominant_sequence(dag: &Dag, cluster_of: &[usize]) -> Time {
    let k = cluster_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut tl: Vec<Timeline> = (0..k).map(|c| Timeline::new(ProcId(c as u32), 1.0)).collect();
    decode_on(dag, &mut tl, cluster_of, &level_rank(dag)).makespan()
}

fn relabel(cluster_of: &mut [usize]) {
    let mut map = std::collections::HashMap::new();
    for c in cluster_of.iter_mut() {
        let next = map.len();
        *c = *map.entry(*c).or_insert(next);
    }
}

pub(crate) fn dsc_on(dag: &Dag, tl: &mut [Timeline]) -> (Clustering, DagSchedule) {
    let n = dag.len();
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut ds = dominant_sequence(dag, &cluster_of);
    let mut history = vec![ds];

    let mut edges: Vec<(Time, TaskId, TaskId, usize, usize)> = (0..n)
        .flat_map(|u| dag.children(u).iter().map(move |&(v, c)| (u, v, c)))
        .map(|(u, v, c)| (c, dag.task(u).id, dag.task(v).id, u, v))
        .collect();
    edges.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for &(_, _, _, u, v) in &edges {
        let (cu, cv) = (cluster_of[u], cluster_of[v]);
        if cu == cv {
            continue;
        }
        let trial: Vec<usize> = cluster_of.iter().map(|&c| if c == cv { cu } else { c }).collect();
        let d = dominant_sequence(dag, &trial);
        if d <= ds {
            cluster_of = trial;
            ds = d;
            history.push(d);
        }
    }
    relabel(&mut cluster_of);

    let count = |co: &[usize]| co.iter().copied().max().map_or(0, |m| m + 1);
    let load = |co: &[usize], c: usize| -> Time { (0..n).filter(|&i| co[i] == c).map(|i| dag.task(i).cost).sum() };
    let min_id = |co: &[usize], c: usize| (0..n).filter(|&i| co[i] == c).map(|i| dag.task(i).id).min();
    while count(&cluster_of) > tl.len() {
        let mut by_load: Vec<usize> = (0..count(&cluster_of)).collect();
        by_load.sort_by_key(|&c| (load(&cluster_of, c), min_id(&cluster_of, c)));
        let (a, b) = (by_load[0], by_load[1]);
        for c in cluster_of.iter_mut() {
            if *c == b {
                *c = a;
            }
        }
        relabel(&mut cluster_of);
    }

    let k = count(&cluster_of);
    let mut clusters: Vec<usize> = (0..k).collect();
    clusters.sort_by(|&a, &b| {
        load(&cluster_of, b)
            .cmp(&load(&cluster_of, a))
            .then(min_id(&cluster_of, a).cmp(&min_id(&cluster_of, b)))
    });
    let mut procs: Vec<usize> = (0..tl.len()).collect();
    procs.sort_by(|&a, &b| tl[b].speed.total_cmp(&tl[a].speed).then(a.cmp(&b)));
    let mut proc_of_cluster = vec![0; k];
    for (rank, &c) in clusters.iter().enumerate() {
        proc_of_cluster[c] = procs[rank];
    }
    let assignment: Vec<usize> = cluster_of.iter().map(|&c| proc_of_cluster[c]).collect();
    let schedule = decode_on(dag, tl, &assignment, &level_rank(dag));

    let members: Vec<Vec<TaskId>> = clusters
        .iter()
        .map(|&c| {
            let mut v: Vec<(Time, TaskId)> = (0..n)
                .filter(|&i| cluster_of[i] == c)
                .map(|i| {
                    let id = dag.task(i).id;
                    (schedule.primary(id).expect("every task scheduled").start, id)
                })
                .collect();
            v.sort();
            v.into_iter().map(|(_, id)| id).collect()
        })
        .collect();
    let clustering = Clustering {
        clusters: members,
        processors: clusters.iter().map(|&c| tl[proc_of_cluster[c]].processor).collect(),
        ds_history: history,
        schedule: schedule.clone(),
    };
    (clustering, schedule)
}

/// Dominant-sequence clustering: edges are visited heaviest first and the
/// clusters at their ends merged whenever that does not lengthen the
/// dominant sequence. The smallest clusters are then merged until they fit
/// the platform, mapped heaviest cluster to fastest processor and ordered by
/// level.
pub fn dsc(dag: &Dag, platform: &Platform) -> Clustering {
    dsc_on(dag, &mut Timelines::new(platform).0).0
}
