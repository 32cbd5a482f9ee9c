//! Choice of the conditioning subset of observed sources that yields the
//! finest partition of the unobserved nodes.

use serde::Serialize;

use crate::dsep::{partition, LatentPartition};
use crate::error::{Error, Result};
use crate::graph::{classify_roles, Dag, NodeId, NodeSet, PATH_ENUMERATION_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectOptions {
    /// Drop observed nodes that only ever act as colliders before the search.
    pub prune: bool,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { prune: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetScore {
    pub subset: NodeSet,
    pub group_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionReport {
    pub chosen: NodeSet,
    pub partition: LatentPartition,
    pub group_count: usize,
    pub candidates: NodeSet,
    pub pruned: NodeSet,
    pub candidates_evaluated: usize,
    pub table: Vec<SubsetScore>,
}

fn candidates(dag: &Dag, options: SelectOptions) -> Result<(NodeSet, NodeSet)> {
    let observed = dag.observed();
    if observed.is_empty() {
        return Err(Error::NoObservedSources);
    }
    let (kept, pruned): (NodeSet, NodeSet) = if options.prune {
        let roles = classify_roles(dag)?;
        observed.into_iter().partition(|&id| !roles.get(id).is_collider_only())
    } else {
        (observed, NodeSet::new())
    };
    if kept.is_empty() {
        return Err(Error::NoCandidates);
    }
    if kept.len() > PATH_ENUMERATION_LIMIT {
        return Err(Error::GraphTooLarge { size: kept.len(), limit: PATH_ENUMERATION_LIMIT });
    }
    Ok((kept, pruned))
}

/// Non-empty subsets ordered by size, then lexicographically by sorted ids.
fn subsets(items: &[NodeId]) -> Vec<NodeSet> {
    let k = items.len();
    let mut out: Vec<Vec<NodeId>> = (1u32..(1 << k))
        .map(|mask| (0..k).filter(|&i| mask & (1 << i) != 0).map(|i| items[i]).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.into_iter().map(|v| v.into_iter().collect()).collect()
}

/// Scores every non-empty subset of the (optionally pruned) candidates.
pub fn enumerate_subsets(dag: &Dag, options: SelectOptions) -> Result<Vec<SubsetScore>> {
    let (kept, _) = candidates(dag, options)?;
    score_all(dag, &kept)
}

fn score_all(dag: &Dag, kept: &NodeSet) -> Result<Vec<SubsetScore>> {
    let items: Vec<NodeId> = kept.iter().copied().collect();
    subsets(&items)
        .into_iter()
        .map(|subset| {
            let group_count = partition(dag, &subset)?.group_count();
            Ok(SubsetScore { subset, group_count })
        })
        .collect()
}

/// `a` beats `b`: more groups, then fewer conditioning nodes, then the
/// lexicographically smaller id list.
fn better(a: &SubsetScore, b: &SubsetScore) -> bool {
    a.group_count
        .cmp(&b.group_count)
        .then_with(|| b.subset.len().cmp(&a.subset.len()))
        .then_with(|| b.subset.iter().cmp(a.subset.iter()))
        .is_gt()
}

pub fn select(dag: &Dag, options: SelectOptions) -> Result<SelectionReport> {
    let (kept, pruned) = candidates(dag, options)?;
    let table = score_all(dag, &kept)?;

    // The incumbent starts at the candidates that act only as confounders,
    // when there are any; every subset is scored afterwards regardless.
    let mut best: Option<SubsetScore> = None;
    if options.prune {
        let roles = classify_roles(dag)?;
        let confounders: NodeSet =
            kept.iter().copied().filter(|&id| roles.get(id).is_non_collider_only()).collect();
        best = table.iter().find(|s| s.subset == confounders).cloned();
    }
    for score in &table {
        if best.as_ref().is_none_or(|b| better(score, b)) {
            best = Some(score.clone());
        }
    }
    let best = best.expect("at least one candidate subset");
    let partition = partition(dag, &best.subset)?;
    Ok(SelectionReport {
        chosen: best.subset,
        group_count: partition.group_count(),
        partition,
        candidates: kept,
        pruned,
        candidates_evaluated: table.len(),
        table,
    })
}

/// JSON view of a [`SelectionReport`] using node labels.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionSummary {
    pub chosen: Vec<String>,
    pub groups: Vec<Vec<String>>,
    pub group_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explain: Option<SelectionExplain>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionExplain {
    pub candidates: Vec<String>,
    pub pruned: Vec<String>,
    pub candidates_evaluated: usize,
    pub subsets: Vec<SubsetRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetRow {
    pub subset: Vec<String>,
    pub group_count: usize,
}

impl SelectionReport {
    pub fn summary(&self, dag: &Dag, explain: bool) -> SelectionSummary {
        SelectionSummary {
            chosen: dag.labels_of(&self.chosen),
            groups: self.partition.groups.iter().map(|g| dag.labels_of(g)).collect(),
            group_count: self.group_count,
            explain: explain.then(|| SelectionExplain {
                candidates: dag.labels_of(&self.candidates),
                pruned: dag.labels_of(&self.pruned),
                candidates_evaluated: self.candidates_evaluated,
                subsets: self
                    .table
                    .iter()
                    .map(|s| SubsetRow { subset: dag.labels_of(&s.subset), group_count: s.group_count })
                    .collect(),
            }),
        }
    }
}
