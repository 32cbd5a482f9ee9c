use serde::{Deserialize, Serialize};

use super::{Dag, NodeId, NodeSet};
use crate::error::{Error, Result};

/// On-disk graph description shared by every command.
///
/// ```json
/// {"nodes":[{"id":0,"label":"z1","observed":false}],"edges":[[0,1]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: usize,
    pub label: String,
    pub observed: bool,
}

impl GraphFile {
    pub fn into_dag(self) -> Result<Dag> {
        let n = self.nodes.len();
        let mut slots: Vec<Option<NodeEntry>> = vec![None; n];
        for node in self.nodes {
            if node.id >= n {
                return Err(Error::MalformedGraph(format!(
                    "node ids must be dense 0..{}, found {}",
                    n.saturating_sub(1),
                    node.id
                )));
            }
            let id = node.id;
            if slots[id].replace(node).is_some() {
                return Err(Error::MalformedGraph(format!("duplicate node id {id}")));
            }
        }
        let nodes: Vec<NodeEntry> = slots.into_iter().map(|s| s.expect("dense ids")).collect();
        let observed: NodeSet = nodes.iter().filter(|n| n.observed).map(|n| NodeId(n.id)).collect();
        let labels = nodes.into_iter().map(|n| n.label).collect();
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Dag::new(labels, &edges, &observed)
    }

    pub fn from_dag(dag: &Dag) -> Self {
        GraphFile {
            nodes: (0..dag.n())
                .map(|i| NodeEntry {
                    id: i,
                    label: dag.labels[i].clone(),
                    observed: dag.observed[i],
                })
                .collect(),
            edges: dag.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl Dag {
    pub fn from_json(text: &str) -> Result<Dag> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.into_dag()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from_dag(self)).expect("graph serializes")
    }
}
