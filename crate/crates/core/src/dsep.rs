//! d-separation: Bayes-ball reachability, a path-enumeration oracle, and
//! partitioning of unobserved nodes into mutually d-separated groups.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, NodeSet, PATH_ENUMERATION_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityResult {
    pub sources: NodeSet,
    pub conditioning: NodeSet,
    /// d-connected nodes, with conditioned and observed nodes filtered out.
    pub reached: NodeSet,
}

fn disjoint(dag: &Dag, a: &NodeSet, b: &NodeSet) -> Result<()> {
    match a.intersection(b).next() {
        Some(&id) => Err(Error::OverlappingSets(dag.label(id).to_string())),
        None => Ok(()),
    }
}

fn mask(n: usize, set: &NodeSet) -> Vec<bool> {
    let mut m = vec![false; n];
    for id in set {
        m[id.0] = true;
    }
    m
}

#[derive(Clone, Copy)]
enum Arrival {
    /// the ball arrives from a child
    FromChild,
    /// the ball arrives from a parent
    FromParent,
}

/// Bayes-ball over (node, direction) states. Returns every node that is
/// d-connected to `sources` given `conditioning`, sources included and
/// conditioned nodes excluded.
fn reach(dag: &Dag, sources: &NodeSet, conditioning: &[bool]) -> Vec<bool> {
    let n = dag.n();
    let opens_collider: Vec<bool> = (0..n)
        .map(|v| conditioning[v] || (0..n).any(|d| conditioning[d] && dag.is_descendant(v, d)))
        .collect();
    let mut seen_up = vec![false; n];
    let mut seen_down = vec![false; n];
    let mut reached = vec![false; n];
    let mut queue: VecDeque<(usize, Arrival)> =
        sources.iter().map(|s| (s.0, Arrival::FromChild)).collect();

    while let Some((v, arrival)) = queue.pop_front() {
        let id = NodeId(v);
        match arrival {
            Arrival::FromChild => {
                if std::mem::replace(&mut seen_up[v], true) || conditioning[v] {
                    continue;
                }
                reached[v] = true;
                queue.extend(dag.parents(id).iter().map(|&p| (p, Arrival::FromChild)));
                queue.extend(dag.children(id).iter().map(|&c| (c, Arrival::FromParent)));
            }
            Arrival::FromParent => {
                if std::mem::replace(&mut seen_down[v], true) {
                    continue;
                }
                if !conditioning[v] {
                    reached[v] = true;
                    queue.extend(dag.children(id).iter().map(|&c| (c, Arrival::FromParent)));
                }
                if opens_collider[v] {
                    queue.extend(dag.parents(id).iter().map(|&p| (p, Arrival::FromChild)));
                }
            }
        }
    }
    reached
}

/// Nodes d-connected to `sources` given `conditioning`, excluding conditioned
/// and observed nodes.
pub fn bayes_ball(dag: &Dag, sources: &NodeSet, conditioning: &NodeSet) -> Result<ReachabilityResult> {
    dag.check_ids(sources)?;
    dag.check_ids(conditioning)?;
    disjoint(dag, sources, conditioning)?;
    let cond = mask(dag.n(), conditioning);
    let reached = reach(dag, sources, &cond)
        .into_iter()
        .enumerate()
        .filter(|&(v, r)| r && !dag.is_observed(NodeId(v)))
        .map(|(v, _)| NodeId(v))
        .collect();
    Ok(ReachabilityResult {
        sources: sources.clone(),
        conditioning: conditioning.clone(),
        reached,
    })
}

fn check_query(dag: &Dag, a: &NodeSet, b: &NodeSet, conditioning: &NodeSet) -> Result<()> {
    for set in [a, b, conditioning] {
        dag.check_ids(set)?;
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    disjoint(dag, a, b)?;
    disjoint(dag, a, conditioning)?;
    disjoint(dag, b, conditioning)
}

/// True iff every path between `a` and `b` is blocked by `conditioning`.
pub fn d_separated(dag: &Dag, a: &NodeSet, b: &NodeSet, conditioning: &NodeSet) -> Result<bool> {
    check_query(dag, a, b, conditioning)?;
    let reached = reach(dag, a, &mask(dag.n(), conditioning));
    Ok(b.iter().all(|id| !reached[id.0]))
}

/// Reference d-separation by enumerating every simple path of the skeleton.
/// Exponential; limited to graphs of at most 20 nodes.
pub fn d_separated_oracle(
    dag: &Dag,
    a: &NodeSet,
    b: &NodeSet,
    conditioning: &NodeSet,
) -> Result<bool> {
    if dag.n() > PATH_ENUMERATION_LIMIT {
        return Err(Error::GraphTooLarge { size: dag.n(), limit: PATH_ENUMERATION_LIMIT });
    }
    check_query(dag, a, b, conditioning)?;
    let n = dag.n();
    let cond = mask(n, conditioning);
    let targets = mask(n, b);
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| dag.neighbors(NodeId(i))).collect();
    let collider_open = |v: usize| cond[v] || (0..n).any(|d| cond[d] && dag.is_descendant(v, d));

    let active = |path: &[usize]| {
        path.windows(3).all(|w| {
            let (p, m, q) = (w[0], w[1], w[2]);
            if dag.has_edge(p, m) && dag.has_edge(q, m) {
                collider_open(m)
            } else {
                !cond[m]
            }
        })
    };

    fn search(
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        neighbors: &[Vec<usize>],
        targets: &[bool],
        active: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        let last = *path.last().unwrap();
        if path.len() > 1 && targets[last] && active(path) {
            return true;
        }
        for &next in &neighbors[last] {
            if on_path[next] {
                continue;
            }
            on_path[next] = true;
            path.push(next);
            let found = search(path, on_path, neighbors, targets, active);
            path.pop();
            on_path[next] = false;
            if found {
                return true;
            }
        }
        false
    }

    for &start in a {
        let mut on_path = vec![false; n];
        on_path[start.0] = true;
        let mut path = vec![start.0];
        if search(&mut path, &mut on_path, &neighbors, &targets, &active) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Unobserved nodes split into groups that are mutually d-separated given
/// `conditioning`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentPartition {
    pub conditioning: NodeSet,
    /// observed sources left out of the conditioning set
    pub unconditioned_observed: NodeSet,
    /// ascending members, ordered by smallest member
    pub groups: Vec<NodeSet>,
}

impl LatentPartition {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// All grouped nodes in group order.
    pub fn grouped_nodes(&self) -> Vec<NodeId> {
        self.groups.iter().flatten().copied().collect()
    }

    pub fn to_file(&self, dag: &Dag) -> PartitionFile {
        PartitionFile {
            conditioning: dag.labels_of(&self.conditioning),
            groups: self.groups.iter().map(|g| dag.labels_of(g)).collect(),
        }
    }

    /// Rebuilds a partition from its file form, recomputing nothing: the
    /// groups are taken as given after validation against `dag`.
    pub fn from_file(dag: &Dag, file: &PartitionFile) -> Result<Self> {
        let conditioning = dag.ids_of(&file.conditioning)?;
        if let Some(&id) = conditioning.iter().find(|&&id| !dag.is_observed(id)) {
            return Err(Error::NotObserved(dag.label(id).to_string()));
        }
        let mut groups = Vec::with_capacity(file.groups.len());
        let mut seen = NodeSet::new();
        for g in &file.groups {
            let group = dag.ids_of(g)?;
            if group.is_empty() {
                return Err(Error::EmptySet);
            }
            for &id in &group {
                if dag.is_observed(id) {
                    return Err(Error::InvalidSpec(format!(
                        "observed node {} cannot belong to a group",
                        dag.label(id)
                    )));
                }
                if !seen.insert(id) {
                    return Err(Error::OverlappingSets(dag.label(id).to_string()));
                }
            }
            groups.push(group);
        }
        groups.sort_by_key(|g| *g.iter().next().unwrap());
        let unconditioned_observed = dag.observed().difference(&conditioning).copied().collect();
        Ok(LatentPartition { conditioning, unconditioned_observed, groups })
    }
}

/// Label-level form of a [`LatentPartition`]:
/// `{"conditioning":["z4"],"groups":[["z1"],["z3"]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub conditioning: Vec<String>,
    pub groups: Vec<Vec<String>>,
}

/// Groups unobserved nodes by repeated Bayes-ball: starting from the smallest
/// unassigned node, the reachable set is grown to a fixed point.
pub fn partition(dag: &Dag, conditioning: &NodeSet) -> Result<LatentPartition> {
    dag.check_ids(conditioning)?;
    if let Some(&id) = conditioning.iter().find(|&&id| !dag.is_observed(id)) {
        return Err(Error::NotObserved(dag.label(id).to_string()));
    }
    let cond = mask(dag.n(), conditioning);
    let mut assigned = vec![false; dag.n()];
    let mut groups = Vec::new();
    for start in dag.unobserved() {
        if assigned[start.0] {
            continue;
        }
        let mut group: NodeSet = [start].into();
        loop {
            let grown: NodeSet = reach(dag, &group, &cond)
                .into_iter()
                .enumerate()
                .filter(|&(v, r)| r && !dag.is_observed(NodeId(v)))
                .map(|(v, _)| NodeId(v))
                .chain(group.iter().copied())
                .collect();
            if grown.len() == group.len() {
                break;
            }
            group = grown;
        }
        for id in &group {
            assigned[id.0] = true;
        }
        groups.push(group);
    }
    Ok(LatentPartition {
        conditioning: conditioning.clone(),
        unconditioned_observed: dag.observed().difference(conditioning).copied().collect(),
        groups,
    })
}
