//! Structural roles (collider / non-collider) of nodes on paths between
//! unobserved nodes. Used to prune conditioning candidates.

use serde::Serialize;

use super::{Dag, NodeId, PATH_ENUMERATION_LIMIT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoleSet {
    pub collider: bool,
    pub non_collider: bool,
}

impl RoleSet {
    pub fn is_collider_only(self) -> bool {
        self.collider && !self.non_collider
    }

    pub fn is_non_collider_only(self) -> bool {
        self.non_collider && !self.collider
    }

    pub fn is_empty(self) -> bool {
        !self.collider && !self.non_collider
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeRoles {
    roles: Vec<RoleSet>,
}

impl NodeRoles {
    pub fn get(&self, id: NodeId) -> RoleSet {
        self.roles[id.0]
    }

    pub fn as_slice(&self) -> &[RoleSet] {
        &self.roles
    }
}

/// Records, for every node, whether it sits as a collider and/or as a
/// non-collider in the interior of some simple skeleton path joining two
/// distinct unobserved nodes.
pub fn classify_roles(dag: &Dag) -> Result<NodeRoles> {
    let n = dag.n();
    if n > PATH_ENUMERATION_LIMIT {
        return Err(Error::GraphTooLarge { size: n, limit: PATH_ENUMERATION_LIMIT });
    }
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| dag.neighbors(NodeId(i))).collect();
    let mut roles = vec![RoleSet::default(); n];
    let mut on_path = vec![false; n];
    let mut path = Vec::with_capacity(n);
    for start in dag.unobserved() {
        path.push(start.0);
        on_path[start.0] = true;
        walk(dag, &neighbors, &mut path, &mut on_path, &mut roles);
        on_path[start.0] = false;
        path.pop();
    }
    Ok(NodeRoles { roles })
}

fn walk(
    dag: &Dag,
    neighbors: &[Vec<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    roles: &mut [RoleSet],
) {
    let last = *path.last().expect("non-empty path");
    // each unordered endpoint pair is visited once, from the smaller id
    if path.len() >= 3 && !dag.observed[last] && last > path[0] {
        for w in path.windows(3) {
            let (prev, mid, next) = (w[0], w[1], w[2]);
            if dag.has_edge(prev, mid) && dag.has_edge(next, mid) {
                roles[mid].collider = true;
            } else {
                roles[mid].non_collider = true;
            }
        }
    }
    for &next in &neighbors[last] {
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        path.push(next);
        walk(dag, neighbors, path, on_path, roles);
        path.pop();
        on_path[next] = false;
    }
}
