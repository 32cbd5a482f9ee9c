mod common;

use auxsel_core::graph::{Dag, NodeSet};
use auxsel_core::select::{select, SelectOptions};
use auxsel_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn dag_strategy() -> impl Strategy<Value = Dag> {
    (2usize..=6, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = common::rng(seed);
        let p = rng.random_range(0.15..0.75);
        common::random_dag(&mut rng, n, p, 0.5)
    })
}

/// Exhaustive search over non-empty observed subsets, scored with the oracle.
fn oracle_select(dag: &Dag) -> Option<(NodeSet, usize)> {
    let observed: Vec<usize> = dag.observed().iter().map(|id| id.0).collect();
    let members: Vec<usize> = dag.unobserved().iter().map(|id| id.0).collect();
    let mut subsets: Vec<NodeSet> = common::subsets_of(&observed).into_iter().filter(|s| !s.is_empty()).collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    let mut best: Option<(NodeSet, usize)> = None;
    for s in subsets {
        let count = common::oracle_components(dag, &members, &s);
        if best.as_ref().is_none_or(|(_, c)| count > *c) {
            best = Some((s, count));
        }
    }
    best
}

#[test]
fn no_observed_nodes_is_an_error() {
    let dag = auxsel_core::build_dag(3, &[(0, 1)], &NodeSet::new()).unwrap();
    assert_eq!(select(&dag, SelectOptions::default()).unwrap_err(), Error::NoObservedSources);
}

proptest! {
    #[test]
    fn unpruned_selection_is_optimal(dag in dag_strategy()) {
        let oracle = oracle_select(&dag);
        match select(&dag, SelectOptions { prune: false }) {
            Ok(report) => {
                let (subset, count) = oracle.unwrap();
                prop_assert_eq!(report.group_count, count);
                prop_assert_eq!(report.chosen, subset);
            }
            Err(e) => {
                prop_assert_eq!(e, Error::NoObservedSources);
                prop_assert!(oracle.is_none());
            }
        }
    }

    #[test]
    fn pruning_keeps_the_maximum(dag in dag_strategy()) {
        let full = select(&dag, SelectOptions { prune: false });
        match select(&dag, SelectOptions { prune: true }) {
            Ok(pruned) => prop_assert_eq!(pruned.group_count, full.unwrap().group_count),
            Err(Error::NoCandidates) | Err(Error::NoObservedSources) => {}
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn selection_is_deterministic(dag in dag_strategy()) {
        let a = select(&dag, SelectOptions::default());
        let b = select(&dag, SelectOptions::default());
        prop_assert_eq!(a.map(|r| r.chosen), b.map(|r| r.chosen));
    }
}
