mod common;

use std::collections::BTreeMap;

use auxsel_core::dsep::partition;
use auxsel_core::graph::{build_dag, node_set, topological_order, Dag, NodeSet};
use auxsel_core::scm::{analytic_covariance, conditional, random_spec, sample, Noise, ScmSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn chain(beta: f64) -> ScmSpec {
    let dag = build_dag(2, &[(0, 1)], &NodeSet::new()).unwrap();
    ScmSpec::new(dag, BTreeMap::from([((0, 1), beta)]), vec![Noise::default(); 2], 11).unwrap()
}

/// Covariance by recursion over a topological order, one node at a time.
fn recursive_covariance(spec: &ScmSpec) -> DMatrix<f64> {
    let dag = spec.dag();
    let n = dag.n();
    let mut cov = DMatrix::zeros(n, n);
    let mut done: Vec<usize> = Vec::new();
    for id in topological_order(dag) {
        let j = id.0;
        let parents: Vec<(usize, f64)> =
            dag.parents(id).iter().map(|&p| (p, spec.coefficient(p, j).unwrap())).collect();
        for &k in &done {
            let c: f64 = parents.iter().map(|&(p, b)| b * cov[(p, k)]).sum();
            cov[(j, k)] = c;
            cov[(k, j)] = c;
        }
        let mut var = spec.noise()[j].scale.powi(2);
        for &(p, bp) in &parents {
            for &(q, bq) in &parents {
                var += bp * bq * cov[(p, q)];
            }
        }
        cov[(j, j)] = var;
        done.push(j);
    }
    cov
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn chain_covariance_matches_hand_computation() {
    let spec = chain(0.5);
    let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.25]);
    assert!(max_abs_diff(&analytic_covariance(&spec).unwrap(), &expected) < 1e-15);
    let z = sample(&spec, 100_000).unwrap();
    assert!(max_abs_diff(&common::empirical_covariance(&z.data), &expected) < 0.03);
}

#[test]
fn edgeless_graph_has_unit_variances() {
    let dag = build_dag(4, &[], &NodeSet::new()).unwrap();
    let z = sample(&random_spec(&dag, 5), 100_000).unwrap();
    let cov = common::empirical_covariance(&z.data);
    for i in 0..4 {
        assert!((cov[(i, i)] - 1.0).abs() < 0.03);
    }
}

#[test]
fn empirical_covariance_converges() {
    let mut rng = common::rng(99);
    for trial in 0..5 {
        let dag = common::random_dag(&mut rng, 5, 0.5, 0.0);
        let spec = random_spec(&dag, trial);
        let sigma = analytic_covariance(&spec).unwrap();
        for rows in [10_000, 100_000] {
            let z = sample(&spec, rows).unwrap();
            let err = max_abs_diff(&common::empirical_covariance(&z.data), &sigma);
            let bound = 5.0 * (1.0 / rows as f64).sqrt() * sigma.abs().max();
            assert!(err < bound, "trial {trial} rows {rows}: {err} >= {bound}");
        }
    }
}

#[test]
fn laplace_noise_has_requested_variance() {
    let dag = build_dag(1, &[], &NodeSet::new()).unwrap();
    let spec = random_spec(&dag, 3)
        .with_noise(vec![Noise { family: auxsel_core::scm::NoiseFamily::Laplace, scale: 2.0 }])
        .unwrap();
    let z = sample(&spec, 200_000).unwrap();
    let var = common::empirical_covariance(&z.data)[(0, 0)];
    assert!((var - 4.0).abs() < 0.1, "{var}");
}

#[test]
fn chain_conditional_by_schur_complement() {
    let spec = chain(0.5);
    let c = conditional(&spec, &node_set([1]), &node_set([0]), &[2.0]).unwrap();
    assert!((c.mean[0] - 1.0).abs() < 1e-15);
    assert!((c.covariance[(0, 0)] - 1.0).abs() < 1e-15);
}

#[test]
fn collider_conditioning_induces_negative_covariance() {
    let dag = build_dag(3, &[(0, 2), (1, 2)], &NodeSet::new()).unwrap();
    let spec =
        ScmSpec::new(dag, BTreeMap::from([((0, 2), 1.0), ((1, 2), 1.0)]), vec![Noise::default(); 3], 0).unwrap();
    let c = conditional(&spec, &node_set([0, 1]), &node_set([2]), &[0.0]).unwrap();
    assert!(c.covariance[(0, 1)] < 0.0);
    assert!((c.covariance[(0, 1)] + 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn empty_conditioning_is_the_marginal() {
    let spec = random_spec(&common::observed_hub(), 4);
    let sigma = analytic_covariance(&spec).unwrap();
    let c = conditional(&spec, &node_set([0, 3]), &NodeSet::new(), &[]).unwrap();
    assert_eq!(c.covariance[(0, 0)], sigma[(0, 0)]);
    assert_eq!(c.covariance[(1, 1)], sigma[(3, 3)]);
}

fn spec_strategy() -> impl Strategy<Value = (Dag, ScmSpec)> {
    (2usize..=6, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = common::rng(seed);
        let p = rng.random_range(0.2..0.8);
        let dag = common::random_dag(&mut rng, n, p, 0.4);
        let spec = random_spec(&dag, seed);
        (dag, spec)
    })
}

proptest! {
    #[test]
    fn analytic_covariance_matches_recursion((_dag, spec) in spec_strategy()) {
        let a = analytic_covariance(&spec).unwrap();
        prop_assert!(max_abs_diff(&a, &recursive_covariance(&spec)) < 1e-12);
    }

    #[test]
    fn conditional_covariance_ignores_values((dag, spec) in spec_strategy(), seed: u64) {
        let given = dag.observed();
        let group = dag.unobserved();
        prop_assume!(!group.is_empty());
        let mut rng = common::rng(seed);
        let covs: Vec<DMatrix<f64>> = (0..3)
            .map(|_| {
                let values: Vec<f64> = (0..given.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
                conditional(&spec, &group, &given, &values).unwrap().covariance
            })
            .collect();
        prop_assert_eq!(&covs[0], &covs[1]);
        prop_assert_eq!(&covs[0], &covs[2]);
    }

    #[test]
    fn partition_groups_are_conditionally_uncorrelated((dag, spec) in spec_strategy()) {
        let observed: Vec<usize> = dag.observed().iter().map(|id| id.0).collect();
        for cond in common::subsets_of(&observed) {
            let p = partition(&dag, &cond).unwrap();
            for (i, g) in p.groups.iter().enumerate() {
                for h in &p.groups[i + 1..] {
                    let both: NodeSet = g.union(h).copied().collect();
                    let zeros = vec![0.0; cond.len()];
                    let c = conditional(&spec, &both, &cond, &zeros).unwrap();
                    let order: Vec<_> = both.iter().copied().collect();
                    for (a, ia) in order.iter().enumerate() {
                        for (b, ib) in order.iter().enumerate() {
                            if g.contains(ia) && h.contains(ib) {
                                prop_assert!(c.covariance[(a, b)].abs() < 1e-8);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn adding_a_node_keeps_existing_columns(seed: u64) {
        let small = build_dag(2, &[(0, 1)], &NodeSet::new()).unwrap();
        let large = build_dag(3, &[(0, 1), (1, 2)], &NodeSet::new()).unwrap();
        let mut coef = BTreeMap::from([((0, 1), 0.7)]);
        let a = ScmSpec::new(small, coef.clone(), vec![Noise::default(); 2], seed).unwrap();
        coef.insert((1, 2), 0.9);
        let b = ScmSpec::new(large, coef, vec![Noise::default(); 3], seed).unwrap();
        let (za, zb) = (sample(&a, 50).unwrap(), sample(&b, 50).unwrap());
        prop_assert_eq!(za.data.column(0), zb.data.column(0));
        prop_assert_eq!(za.data.column(1), zb.data.column(1));
    }
}
