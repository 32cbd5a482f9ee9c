//! Directed acyclic graphs annotated with which nodes are observed.

mod format;
mod roles;

pub use format::{GraphFile, NodeEntry};
pub use roles::{classify_roles, NodeRoles, RoleSet};

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on node counts for routines that enumerate paths or subsets.
pub const PATH_ENUMERATION_LIMIT: usize = 20;

/// Dense node index into a [`Dag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type NodeSet = BTreeSet<NodeId>;

/// Builds a [`NodeSet`] from raw indices.
pub fn node_set<I: IntoIterator<Item = usize>>(ids: I) -> NodeSet {
    ids.into_iter().map(NodeId).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    labels: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    adjacency: Vec<bool>,
    observed: Vec<bool>,
    // strict descendants, row-major n x n
    descendants: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

/// Validates and builds a DAG with default labels `z1..zn`.
pub fn build_dag(n: usize, edges: &[(usize, usize)], observed: &NodeSet) -> Result<Dag> {
    let labels = (1..=n).map(|i| format!("z{i}")).collect();
    Dag::new(labels, edges, observed)
}

impl Dag {
    pub fn new(labels: Vec<String>, edges: &[(usize, usize)], observed: &NodeSet) -> Result<Self> {
        let n = labels.len();
        let mut seen = BTreeSet::new();
        for label in &labels {
            if label.is_empty() {
                return Err(Error::MalformedGraph("empty node label".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::MalformedGraph(format!("duplicate label {label:?}")));
            }
        }
        let mut adjacency = vec![false; n * n];
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            for id in [p, c] {
                if id >= n {
                    return Err(Error::InvalidId { id, n });
                }
            }
            if p == c {
                return Err(Error::CycleDetected(labels[p].clone()));
            }
            if adjacency[p * n + c] {
                return Err(Error::MalformedGraph(format!(
                    "duplicate edge {} -> {}",
                    labels[p], labels[c]
                )));
            }
            adjacency[p * n + c] = true;
            parents[c].push(p);
            children[p].push(c);
        }
        for &NodeId(id) in observed {
            if id >= n {
                return Err(Error::InvalidId { id, n });
            }
        }
        parents.iter_mut().for_each(|v| v.sort_unstable());
        children.iter_mut().for_each(|v| v.sort_unstable());
        let mut edges: Vec<_> = edges.to_vec();
        edges.sort_unstable();

        let mut dag = Dag {
            labels,
            parents,
            children,
            adjacency,
            observed: (0..n).map(|i| observed.contains(&NodeId(i))).collect(),
            descendants: Vec::new(),
            edges,
        };
        let order = dag.kahn();
        if order.len() < n {
            let stuck = (0..n).find(|i| !order.contains(i)).unwrap_or(0);
            return Err(Error::CycleDetected(dag.labels[stuck].clone()));
        }
        dag.descendants = dag.descendant_closure(&order);
        Ok(dag)
    }

    /// Kahn's algorithm, always releasing the smallest ready id first.
    fn kahn(&self) -> Vec<usize> {
        let n = self.n();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        order
    }

    fn descendant_closure(&self, order: &[usize]) -> Vec<bool> {
        let n = self.n();
        let mut desc = vec![false; n * n];
        for &v in order.iter().rev() {
            for &c in &self.children[v] {
                desc[v * n + c] = true;
                for k in 0..n {
                    if desc[c * n + k] {
                        desc[v * n + k] = true;
                    }
                }
            }
        }
        desc
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.0]
    }

    pub fn id_of(&self, label: &str) -> Result<NodeId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(NodeId)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Resolves a list of labels into a node set.
    pub fn ids_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<NodeSet> {
        labels.iter().map(|l| self.id_of(l.as_ref())).collect()
    }

    pub fn labels_of(&self, set: &NodeSet) -> Vec<String> {
        set.iter().map(|&id| self.label(id).to_string()).collect()
    }

    pub fn parents(&self, id: NodeId) -> &[usize] {
        &self.parents[id.0]
    }

    pub fn children(&self, id: NodeId) -> &[usize] {
        &self.children[id.0]
    }

    /// Sorted neighbours in the undirected skeleton.
    pub fn neighbors(&self, id: NodeId) -> Vec<usize> {
        let mut out: Vec<usize> = self.parents[id.0]
            .iter()
            .chain(&self.children[id.0])
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.adjacency[parent * self.n() + child]
    }

    /// Edges as (parent, child), sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_descendant(&self, ancestor: usize, node: usize) -> bool {
        self.descendants[ancestor * self.n() + node]
    }

    pub fn is_observed(&self, id: NodeId) -> bool {
        self.observed[id.0]
    }

    pub fn observed(&self) -> NodeSet {
        (0..self.n()).filter(|&i| self.observed[i]).map(NodeId).collect()
    }

    pub fn unobserved(&self) -> NodeSet {
        (0..self.n()).filter(|&i| !self.observed[i]).map(NodeId).collect()
    }

    pub fn check_ids(&self, set: &NodeSet) -> Result<()> {
        match set.iter().find(|id| id.0 >= self.n()) {
            Some(id) => Err(Error::InvalidId { id: id.0, n: self.n() }),
            None => Ok(()),
        }
    }

    /// Same structure with a different observed set.
    pub fn with_observed(&self, observed: &NodeSet) -> Result<Dag> {
        self.check_ids(observed)?;
        let mut dag = self.clone();
        dag.observed = (0..self.n()).map(|i| observed.contains(&NodeId(i))).collect();
        Ok(dag)
    }

    /// Relabels node `i` as `perm[i]`, carrying labels and observability along.
    pub fn permuted(&self, perm: &[usize]) -> Result<Dag> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut labels = vec![String::new(); n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n {
                return Err(Error::InvalidId { id: p, n });
            }
            labels[p] = self.labels[i].clone();
        }
        let edges: Vec<_> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        let observed = (0..n).filter(|&i| self.observed[i]).map(|i| NodeId(perm[i])).collect();
        Dag::new(labels, &edges, &observed)
    }
}

/// Deterministic topological order: among ready nodes the smallest id goes first.
pub fn topological_order(dag: &Dag) -> Vec<NodeId> {
    dag.kahn().into_iter().map(NodeId).collect()
}
