//! Linear structural causal models: X_i = sum_j beta_ji X_j + eps_i.
//!
//! Randomness comes from ChaCha8 with one stream per use: node `i` draws its
//! noise from stream `i`, and the coefficients into child `i` come from
//! stream `2^32 + i`. Adding nodes therefore never perturbs existing columns.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{topological_order, Dag, NodeId, NodeSet};
use crate::sample::SampleMatrix;

const COEFFICIENT_STREAM: u64 = 1 << 32;

/// Coefficient range for randomly drawn edge weights.
pub const BETA_RANGE: (f64, f64) = (0.5, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Gaussian,
    Laplace,
}

/// Additive noise; `scale` is the standard deviation for either family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub family: NoiseFamily,
    pub scale: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise { family: NoiseFamily::Gaussian, scale: 1.0 }
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScmSpec {
    dag: Dag,
    coefficients: BTreeMap<(usize, usize), f64>,
    noise: Vec<Noise>,
    seed: u64,
}

impl ScmSpec {
    pub fn new(
        dag: Dag,
        coefficients: BTreeMap<(usize, usize), f64>,
        noise: Vec<Noise>,
        seed: u64,
    ) -> Result<Self> {
        let keys: Vec<(usize, usize)> = coefficients.keys().copied().collect();
        if keys != dag.edges() {
            return Err(Error::InvalidSpec("coefficient keys must equal the edge set".into()));
        }
        if coefficients.values().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        if noise.len() != dag.n() {
            return Err(Error::DimensionMismatch { expected: dag.n(), got: noise.len() });
        }
        if let Some(i) = noise.iter().position(|z| !(z.scale > 0.0 && z.scale.is_finite())) {
            return Err(Error::InvalidSpec(format!(
                "noise scale of {} must be positive",
                dag.labels()[i]
            )));
        }
        Ok(ScmSpec { dag, coefficients, noise, seed })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn coefficient(&self, parent: usize, child: usize) -> Option<f64> {
        self.coefficients.get(&(parent, child)).copied()
    }

    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coefficients
    }

    pub fn noise(&self) -> &[Noise] {
        &self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> ScmSpec {
        ScmSpec { seed, ..self.clone() }
    }

    pub fn with_noise(&self, noise: Vec<Noise>) -> Result<ScmSpec> {
        ScmSpec::new(self.dag.clone(), self.coefficients.clone(), noise, self.seed)
    }

    /// Weighted adjacency with `B[child, parent] = beta`.
    pub fn weight_matrix(&self) -> DMatrix<f64> {
        let n = self.dag.n();
        let mut b = DMatrix::zeros(n, n);
        for (&(p, c), &beta) in &self.coefficients {
            b[(c, p)] = beta;
        }
        b
    }

    pub fn to_file(&self) -> ScmFile {
        let labels = self.dag.labels();
        ScmFile {
            seed: self.seed,
            coefficients: self
                .coefficients
                .iter()
                .map(|(&(p, c), &beta)| CoefficientEntry {
                    parent: labels[p].clone(),
                    child: labels[c].clone(),
                    beta,
                })
                .collect(),
            noise: self
                .noise
                .iter()
                .enumerate()
                .map(|(i, z)| NoiseEntry { node: labels[i].clone(), family: z.family, scale: z.scale })
                .collect(),
        }
    }

    pub fn from_file(dag: &Dag, file: &ScmFile) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for e in &file.coefficients {
            let key = (dag.id_of(&e.parent)?.0, dag.id_of(&e.child)?.0);
            if coefficients.insert(key, e.beta).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate coefficient {}->{}", e.parent, e.child)));
            }
        }
        let mut noise: Vec<Option<Noise>> = vec![None; dag.n()];
        for e in &file.noise {
            let id = dag.id_of(&e.node)?.0;
            if noise[id].replace(Noise { family: e.family, scale: e.scale }).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate noise entry for {}", e.node)));
            }
        }
        let noise = noise
            .into_iter()
            .enumerate()
            .map(|(i, z)| {
                z.ok_or_else(|| Error::InvalidSpec(format!("missing noise for {}", dag.labels()[i])))
            })
            .collect::<Result<_>>()?;
        ScmSpec::new(dag.clone(), coefficients, noise, file.seed)
    }
}

/// JSON form of an [`ScmSpec`], keyed by node labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScmFile {
    pub seed: u64,
    pub coefficients: Vec<CoefficientEntry>,
    pub noise: Vec<NoiseEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub parent: String,
    pub child: String,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseEntry {
    pub node: String,
    pub family: NoiseFamily,
    pub scale: f64,
}

/// Draws every edge weight uniformly from [0.5, 1.0]; unit Gaussian noise.
pub fn random_spec(dag: &Dag, seed: u64) -> ScmSpec {
    let mut coefficients = BTreeMap::new();
    for child in 0..dag.n() {
        let mut rng = stream_rng(seed, COEFFICIENT_STREAM + child as u64);
        for &parent in dag.parents(NodeId(child)) {
            coefficients.insert((parent, child), rng.random_range(BETA_RANGE.0..=BETA_RANGE.1));
        }
    }
    ScmSpec::new(dag.clone(), coefficients, vec![Noise::default(); dag.n()], seed)
        .expect("generated spec is valid")
}

fn draw_noise(rng: &mut ChaCha8Rng, noise: Noise) -> f64 {
    match noise.family {
        NoiseFamily::Gaussian => noise.scale * rng.sample::<f64, _>(StandardNormal),
        NoiseFamily::Laplace => {
            // inverse CDF; std-dev `scale` means b = scale / sqrt(2)
            let b = noise.scale / std::f64::consts::SQRT_2;
            loop {
                let u: f64 = rng.random::<f64>() - 0.5;
                let tail = 1.0 - 2.0 * u.abs();
                if tail > 0.0 {
                    return -b * u.signum() * tail.ln();
                }
            }
        }
    }
}

/// Ancestral sampling of `rows` joint draws.
pub fn sample(spec: &ScmSpec, rows: usize) -> Result<SampleMatrix> {
    if rows == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let n = spec.dag.n();
    let mut data = DMatrix::<f64>::zeros(rows, n);
    for node in topological_order(&spec.dag) {
        let i = node.0;
        let mut rng = stream_rng(spec.seed, i as u64);
        let parents = spec.dag.parents(node);
        for r in 0..rows {
            let mut value = 0.0;
            for &p in parents {
                value += spec.coefficients[&(p, i)] * data[(r, p)];
            }
            data[(r, i)] = value + draw_noise(&mut rng, spec.noise[i]);
        }
    }
    SampleMatrix::new(spec.dag.labels().to_vec(), data)
}

fn require_gaussian(spec: &ScmSpec) -> Result<()> {
    match spec.noise.iter().position(|z| z.family != NoiseFamily::Gaussian) {
        Some(i) => Err(Error::NonGaussianNoise(spec.dag.labels()[i].clone())),
        None => Ok(()),
    }
}

/// Sigma = (I - B)^-1 Lambda (I - B)^-T.
pub fn analytic_covariance(spec: &ScmSpec) -> Result<DMatrix<f64>> {
    require_gaussian(spec)?;
    let n = spec.dag.n();
    let i_minus_b = DMatrix::<f64>::identity(n, n) - spec.weight_matrix();
    let inv = i_minus_b.try_inverse().ok_or(Error::SingularCovariance)?;
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        spec.noise.iter().map(|z| z.scale * z.scale),
    ));
    let sigma = &inv * lambda * inv.transpose();
    Ok((&sigma + sigma.transpose()) * 0.5)
}

/// Gaussian law of `group` given `given`; the mean is affine in the given
/// values: `intercept + gain * values`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianConditional {
    pub group: Vec<NodeId>,
    pub given: Vec<NodeId>,
    pub intercept: DVector<f64>,
    pub gain: DMatrix<f64>,
    pub covariance: DMatrix<f64>,
    /// mean at the values passed to [`conditional`]
    pub mean: DVector<f64>,
}

impl GaussianConditional {
    pub fn dim(&self) -> usize {
        self.group.len()
    }

    pub fn mean_at(&self, values: &[f64]) -> Result<DVector<f64>> {
        if values.len() != self.given.len() {
            return Err(Error::DimensionMismatch { expected: self.given.len(), got: values.len() });
        }
        Ok(&self.intercept + &self.gain * DVector::from_column_slice(values))
    }
}

/// Singular-value floor below which the conditioning block counts as singular.
pub const CONDITIONING_TOLERANCE: f64 = 1e-10;

pub fn conditional(
    spec: &ScmSpec,
    group: &NodeSet,
    given: &NodeSet,
    values: &[f64],
) -> Result<GaussianConditional> {
    spec.dag.check_ids(group)?;
    spec.dag.check_ids(given)?;
    if let Some(&id) = group.intersection(given).next() {
        return Err(Error::OverlappingSets(spec.dag.label(id).to_string()));
    }
    if values.len() != given.len() {
        return Err(Error::DimensionMismatch { expected: given.len(), got: values.len() });
    }
    let sigma = analytic_covariance(spec)?;
    let g: Vec<usize> = group.iter().map(|id| id.0).collect();
    let c: Vec<usize> = given.iter().map(|id| id.0).collect();
    let block = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |r, k| sigma[(rows[r], cols[k])])
    };
    let s_gg = block(&g, &g);
    let (gain, covariance) = if c.is_empty() {
        (DMatrix::zeros(g.len(), 0), s_gg)
    } else {
        let s_cc = block(&c, &c);
        let s_gc = block(&g, &c);
        let smallest = s_cc.symmetric_eigenvalues().min();
        if smallest < CONDITIONING_TOLERANCE {
            return Err(Error::SingularConditioning(smallest));
        }
        let chol = s_cc.cholesky().ok_or(Error::SingularConditioning(smallest))?;
        // gain = S_gc S_cc^-1 = (S_cc^-1 S_cg)^T
        let gain = chol.solve(&s_gc.transpose()).transpose();
        let cov = s_gg - &gain * s_gc.transpose();
        (gain, cov)
    };
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    // all marginal means are zero, so the intercept vanishes
    let intercept = DVector::zeros(g.len());
    let mean = &intercept + &gain * DVector::from_column_slice(values);
    Ok(GaussianConditional {
        group: group.iter().copied().collect(),
        given: given.iter().copied().collect(),
        intercept,
        gain,
        covariance,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_dag, node_set};

    fn chain(beta: f64) -> ScmSpec {
        let dag = build_dag(2, &[(0, 1)], &NodeSet::new()).unwrap();
        ScmSpec::new(dag, [((0, 1), beta)].into(), vec![Noise::default(); 2], 1).unwrap()
    }

    #[test]
    fn random_spec_is_deterministic_and_in_range() {
        let dag = build_dag(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)], &NodeSet::new()).unwrap();
        let a = random_spec(&dag, 11);
        assert_eq!(a, random_spec(&dag, 11));
        assert_ne!(a.coefficients(), random_spec(&dag, 12).coefficients());
        assert!(a.coefficients().values().all(|&b| (0.5..=1.0).contains(&b)));
        assert!(a.noise().iter().all(|z| *z == Noise::default()));
        let empty = build_dag(3, &[], &NodeSet::new()).unwrap();
        assert!(random_spec(&empty, 1).coefficients().is_empty());
    }

    #[test]
    fn spec_validation() {
        let dag = build_dag(2, &[(0, 1)], &NodeSet::new()).unwrap();
        assert!(ScmSpec::new(dag.clone(), BTreeMap::new(), vec![Noise::default(); 2], 0).is_err());
        let bad = vec![Noise { family: NoiseFamily::Gaussian, scale: 0.0 }; 2];
        assert!(ScmSpec::new(dag, [((0, 1), 0.5)].into(), bad, 0).is_err());
    }

    #[test]
    fn chain_covariance() {
        let sigma = analytic_covariance(&chain(0.5)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.25]);
        assert!((sigma - expected).abs().max() < 1e-15);
    }

    #[test]
    fn edgeless_covariance_is_identity() {
        let dag = build_dag(3, &[], &NodeSet::new()).unwrap();
        let sigma = analytic_covariance(&random_spec(&dag, 3)).unwrap();
        assert_eq!(sigma, DMatrix::identity(3, 3));
    }

    #[test]
    fn fork_covariance() {
        let dag = build_dag(3, &[(0, 1), (0, 2)], &NodeSet::new()).unwrap();
        let spec = ScmSpec::new(dag, [((0, 1), 1.0), ((0, 2), 1.0)].into(), vec![Noise::default(); 3], 0)
            .unwrap();
        assert_eq!(analytic_covariance(&spec).unwrap()[(1, 2)], 1.0);
    }

    #[test]
    fn laplace_has_no_analytic_covariance() {
        let spec = chain(0.5)
            .with_noise(vec![Noise::default(), Noise { family: NoiseFamily::Laplace, scale: 1.0 }])
            .unwrap();
        assert!(matches!(analytic_covariance(&spec), Err(Error::NonGaussianNoise(l)) if l == "z2"));
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = chain(0.5);
        assert_eq!(sample(&spec, 50).unwrap(), sample(&spec, 50).unwrap());
        assert_ne!(sample(&spec, 50).unwrap(), sample(&spec.with_seed(2), 50).unwrap());
        assert!(sample(&spec, 0).is_err());
    }

    #[test]
    fn chain_conditional() {
        let spec = chain(0.5);
        let c = conditional(&spec, &node_set([1]), &node_set([0]), &[2.0]).unwrap();
        assert!((c.mean[0] - 1.0).abs() < 1e-15);
        assert!((c.covariance[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((c.mean_at(&[-4.0]).unwrap()[0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_conditioning_is_marginal() {
        let spec = chain(0.5);
        let c = conditional(&spec, &node_set([0, 1]), &NodeSet::new(), &[]).unwrap();
        assert_eq!(c.covariance, analytic_covariance(&spec).unwrap());
    }

    #[test]
    fn collider_conditioning_induces_negative_covariance() {
        let dag = build_dag(3, &[(0, 2), (1, 2)], &NodeSet::new()).unwrap();
        let spec = ScmSpec::new(dag, [((0, 2), 1.0), ((1, 2), 1.0)].into(), vec![Noise::default(); 3], 0)
            .unwrap();
        let c = conditional(&spec, &node_set([0, 1]), &node_set([2]), &[0.0]).unwrap();
        // Sigma_gg - s s^T / 3 with s = (1, 1)
        assert!((c.covariance[(0, 1)] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_errors() {
        let spec = chain(0.5);
        assert!(matches!(
            conditional(&spec, &node_set([0]), &node_set([0]), &[0.0]),
            Err(Error::OverlappingSets(_))
        ));
        assert!(matches!(
            conditional(&spec, &node_set([0]), &node_set([1]), &[]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn file_roundtrip() {
        let dag = build_dag(3, &[(0, 1), (1, 2)], &NodeSet::new()).unwrap();
        let spec = random_spec(&dag, 9);
        let text = serde_json::to_string(&spec.to_file()).unwrap();
        let back: ScmFile = serde_json::from_str(&text).unwrap();
        assert_eq!(ScmSpec::from_file(&dag, &back).unwrap(), spec);
    }
}
