//! Test-only oracles and fixtures, independent of the code paths they check.
#![allow(dead_code)]

use auxsel_core::graph::{build_dag, node_set, Dag, NodeSet};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// u -> z1..z4, u observed (ids: u = 0, z1..z4 = 1..4).
pub fn observed_fork() -> Dag {
    let labels = ["u", "z1", "z2", "z3", "z4"].map(String::from).to_vec();
    Dag::new(labels, &[(0, 1), (0, 2), (0, 3), (0, 4)], &node_set([0])).unwrap()
}

/// z3->z5, z3->z4, z5->z1, z5->z2, z5->z4; z5 observed.
pub fn observed_hub() -> Dag {
    build_dag(5, &[(2, 4), (2, 3), (4, 0), (4, 1), (4, 3)], &node_set([4])).unwrap()
}

/// z1->z2, z3->z2, z4->z3; z2 and z4 observed.
pub fn collider_pair() -> Dag {
    build_dag(4, &[(0, 1), (2, 1), (3, 2)], &node_set([1, 3])).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random DAG: strictly upper-triangular adjacency under a random node
/// permutation, each node observed with probability `p_observed`.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, p_edge: f64, p_observed: f64) -> Dag {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_edge) {
                edges.push((perm[i], perm[j]));
            }
        }
    }
    let observed: NodeSet = (0..n).filter(|_| rng.random_bool(p_observed)).map(auxsel_core::NodeId).collect();
    build_dag(n, &edges, &observed).unwrap()
}

/// Validation corpus: `count` DAGs with 2..=6 nodes.
pub fn corpus(count: usize, seed: u64) -> Vec<Dag> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(2..=6);
            let p_edge = [0.25, 0.4, 0.6][r.random_range(0..3)];
            random_dag(&mut r, n, p_edge, 0.4)
        })
        .collect()
}

pub fn subsets_of(items: &[usize]) -> Vec<NodeSet> {
    (0u32..(1 << items.len()))
        .map(|mask| {
            node_set((0..items.len()).filter(|&i| mask & (1 << i) != 0).map(|i| items[i]))
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Lexicographically smallest valid topological order, by enumerating all
/// permutations.
pub fn brute_force_topological_order(dag: &Dag) -> Vec<usize> {
    permutations(dag.n())
        .into_iter()
        .filter(|order| {
            let mut pos = vec![0; order.len()];
            for (k, &v) in order.iter().enumerate() {
                pos[v] = k;
            }
            dag.edges().iter().all(|&(a, b)| pos[a] < pos[b])
        })
        .min()
        .unwrap()
}

/// Maximum of sum_i |m[i, sigma(i)]| over all n! permutations.
pub fn brute_force_best_sum(m: &DMatrix<f64>) -> f64 {
    permutations(m.nrows())
        .into_iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| m[(i, j)].abs()).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut p = x.to_vec();
    for c in 0..n {
        p[c] = x[c] + h;
        let up = f(&p);
        p[c] = x[c] - h;
        let down = f(&p);
        p[c] = x[c];
        for r in 0..n {
            jac[(r, c)] = (up[r] - down[r]) / (2.0 * h);
        }
    }
    jac
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn lu_determinant(mut m: DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n).max_by(|&a, &b| m[(a, k)].abs().total_cmp(&m[(b, k)].abs())).unwrap();
        if m[(pivot, k)] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            m.swap_rows(pivot, k);
            det = -det;
        }
        det *= m[(k, k)];
        for r in k + 1..n {
            let factor = m[(r, k)] / m[(k, k)];
            for c in k..n {
                m[(r, c)] -= factor * m[(k, c)];
            }
        }
    }
    det
}

/// Empirical covariance with column means removed (divisor N).
pub fn empirical_covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows() as f64;
    let means = data.row_mean();
    let centered = DMatrix::from_fn(data.nrows(), data.ncols(), |r, c| data[(r, c)] - means[c]);
    centered.transpose() * &centered / n
}

/// Pairwise d-connection components of `members` as computed by the oracle,
/// returned as the number of components.
pub fn oracle_components(dag: &Dag, members: &[usize], conditioning: &NodeSet) -> usize {
    let k = members.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let root = find(p, p[x]);
            p[x] = root;
        }
        p[x]
    }
    for i in 0..k {
        for j in i + 1..k {
            let sep = auxsel_core::dsep::d_separated_oracle(
                dag,
                &node_set([members[i]]),
                &node_set([members[j]]),
                conditioning,
            )
            .unwrap();
            if !sep {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..k).filter(|&i| find(&mut parent, i) == i).count()
}
