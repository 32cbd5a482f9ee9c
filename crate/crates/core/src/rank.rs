//! Numerical checks of the linear-independence condition on the stacked
//! first/second log-density derivatives `w = (v_1..v_d, v'_1..v'_d)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dsep::LatentPartition;
use crate::error::{Error, Result};
use crate::scm::{conditional, sample, GaussianConditional, ScmSpec};

/// Relative singular-value threshold used when none is given.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

/// Variation below which a derivative block counts as constant across rows.
pub const CONSTANT_BLOCK_TOLERANCE: f64 = 1e-12;

/// A per-group conditional log-density `log p(z_group | z_o)`.
pub trait GroupDensity {
    fn dim(&self) -> usize;
    fn log_density(&self, z: &[f64], z_o: &[f64]) -> f64;
}

/// Closed-form gradient and Hessian diagonal of a group log-density.
pub trait ClosedFormScore: GroupDensity {
    fn score(&self, z: &[f64], z_o: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;
}

impl GroupDensity for GaussianConditional {
    fn dim(&self) -> usize {
        self.group.len()
    }

    fn log_density(&self, z: &[f64], z_o: &[f64]) -> f64 {
        let Ok(mean) = self.mean_at(z_o) else { return f64::NAN };
        let Some(chol) = self.covariance.clone().cholesky() else { return f64::NAN };
        let diff = DVector::from_column_slice(z) - mean;
        let quad = diff.dot(&chol.solve(&diff));
        let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        let k = z.len() as f64;
        -0.5 * (quad + log_det + k * (2.0 * std::f64::consts::PI).ln())
    }
}

impl ClosedFormScore for GaussianConditional {
    fn score(&self, z: &[f64], z_o: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        let mean = self.mean_at(z_o)?;
        let precision = self
            .covariance
            .clone()
            .cholesky()
            .ok_or(Error::SingularCovariance)?
            .inverse();
        let diff = DVector::from_column_slice(z) - mean;
        let v = -(&precision * diff);
        let v2 = precision.diagonal().map(|p| -p);
        Ok((v.iter().copied().collect(), v2.iter().copied().collect()))
    }
}

/// Scalar Gaussian whose mean and log-variance are affine in `z_o`:
/// `mean = mean_offset + mean_slope . z_o`,
/// `log var = log_var_offset + log_var_slope . z_o`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceModulatedGaussian {
    pub mean_offset: f64,
    pub mean_slope: Vec<f64>,
    pub log_var_offset: f64,
    pub log_var_slope: Vec<f64>,
}

impl VarianceModulatedGaussian {
    fn moments(&self, z_o: &[f64]) -> (f64, f64) {
        let dot = |w: &[f64]| w.iter().zip(z_o).map(|(a, b)| a * b).sum::<f64>();
        (
            self.mean_offset + dot(&self.mean_slope),
            (self.log_var_offset + dot(&self.log_var_slope)).exp(),
        )
    }
}

impl GroupDensity for VarianceModulatedGaussian {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, z: &[f64], z_o: &[f64]) -> f64 {
        let (mean, var) = self.moments(z_o);
        -0.5 * ((z[0] - mean).powi(2) / var + var.ln() + (2.0 * std::f64::consts::PI).ln())
    }
}

impl ClosedFormScore for VarianceModulatedGaussian {
    fn score(&self, z: &[f64], z_o: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mean, var) = self.moments(z_o);
        Ok((vec![-(z[0] - mean) / var], vec![-1.0 / var]))
    }
}

/// Scalar Laplace with location `slope . z_o` and scale `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceLocation {
    pub slope: Vec<f64>,
    pub b: f64,
}

impl GroupDensity for LaplaceLocation {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, z: &[f64], z_o: &[f64]) -> f64 {
        let loc: f64 = self.slope.iter().zip(z_o).map(|(a, b)| a * b).sum();
        -(z[0] - loc).abs() / self.b - (2.0 * self.b).ln()
    }
}

impl<F: Fn(&[f64], &[f64]) -> f64> GroupDensity for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }

    fn log_density(&self, z: &[f64], z_o: &[f64]) -> f64 {
        (self.1)(z, z_o)
    }
}

fn split_point<'a>(dims: &[usize], point: &'a [f64]) -> Result<Vec<&'a [f64]>> {
    let total: usize = dims.iter().sum();
    if point.len() != total {
        return Err(Error::DimensionMismatch { expected: total, got: point.len() });
    }
    let mut out = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for &d in dims {
        out.push(&point[offset..offset + d]);
        offset += d;
    }
    Ok(out)
}

fn assemble(firsts: Vec<Vec<f64>>, seconds: Vec<Vec<f64>>) -> Vec<f64> {
    firsts.into_iter().flatten().chain(seconds.into_iter().flatten()).collect()
}

/// One `w` row from closed-form derivatives. `point` concatenates the group
/// values in group order.
pub fn w_row<D: ClosedFormScore>(groups: &[D], point: &[f64], z_o: &[f64]) -> Result<Vec<f64>> {
    let dims: Vec<usize> = groups.iter().map(GroupDensity::dim).collect();
    let parts = split_point(&dims, point)?;
    let (mut firsts, mut seconds) = (Vec::new(), Vec::new());
    for (group, z) in groups.iter().zip(parts) {
        let (v, v2) = group.score(z, z_o)?;
        firsts.push(v);
        seconds.push(v2);
    }
    Ok(assemble(firsts, seconds))
}

/// Closed-form `w` row for Gaussian conditionals:
/// `v = -Sigma^-1 (z - mu(z_o))`, `v' = -diag(Sigma^-1)`.
pub fn gaussian_w_row(
    conditionals: &[GaussianConditional],
    point: &[f64],
    z_o: &[f64],
) -> Result<Vec<f64>> {
    if let Some(c) = conditionals.iter().find(|c| c.given.len() != z_o.len()) {
        return Err(Error::DimensionMismatch { expected: c.given.len(), got: z_o.len() });
    }
    w_row(conditionals, point, z_o)
}

/// `w` row by central differences of each group's log-density.
pub fn finite_difference_w_row(
    groups: &[&dyn GroupDensity],
    point: &[f64],
    z_o: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidSpec("finite-difference step must be positive".into()));
    }
    let dims: Vec<usize> = groups.iter().map(|g| g.dim()).collect();
    let parts = split_point(&dims, point)?;
    let (mut firsts, mut seconds) = (Vec::new(), Vec::new());
    for (group, z) in groups.iter().zip(parts) {
        let eval = |x: &[f64]| {
            let v = group.log_density(x, z_o);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteDensity)
            }
        };
        let center = eval(z)?;
        let mut x = z.to_vec();
        let (mut v, mut v2) = (Vec::new(), Vec::new());
        for l in 0..z.len() {
            x[l] = z[l] + h;
            let up = eval(&x)?;
            x[l] = z[l] - h;
            let down = eval(&x)?;
            x[l] = z[l];
            v.push((up - down) / (2.0 * h));
            v2.push((up - 2.0 * center + down) / (h * h));
        }
        firsts.push(v);
        seconds.push(v2);
    }
    Ok(assemble(firsts, seconds))
}

/// Rows `w(point, z_o_i)`, one per conditioning sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix {
    pub rows: DMatrix<f64>,
    pub z_o_samples: Vec<Vec<f64>>,
    pub point: Vec<f64>,
    pub group_sizes: Vec<usize>,
}

impl WMatrix {
    pub fn build(
        point: Vec<f64>,
        z_o_samples: Vec<Vec<f64>>,
        group_sizes: Vec<usize>,
        row: impl Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    ) -> Result<Self> {
        let n_u: usize = group_sizes.iter().sum();
        if point.len() != n_u {
            return Err(Error::DimensionMismatch { expected: n_u, got: point.len() });
        }
        let mut data = Vec::with_capacity(z_o_samples.len() * 2 * n_u);
        for z_o in &z_o_samples {
            let r = row(&point, z_o)?;
            if r.len() != 2 * n_u {
                return Err(Error::DimensionMismatch { expected: 2 * n_u, got: r.len() });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteDensity);
            }
            data.extend(r);
        }
        let rows = DMatrix::from_row_slice(z_o_samples.len(), 2 * n_u, &data);
        Ok(WMatrix { rows, z_o_samples, point, group_sizes })
    }

    pub fn from_rows(rows: DMatrix<f64>, group_sizes: Vec<usize>) -> Result<Self> {
        let n_u: usize = group_sizes.iter().sum();
        if rows.ncols() != 2 * n_u {
            return Err(Error::DimensionMismatch { expected: 2 * n_u, got: rows.ncols() });
        }
        Ok(WMatrix { rows, z_o_samples: Vec::new(), point: Vec::new(), group_sizes })
    }

    pub fn n_u(&self) -> usize {
        self.rows.ncols() / 2
    }

    /// Largest spread (max - min) of any column in the `v` block.
    pub fn v_variation(&self) -> f64 {
        self.block_variation(0)
    }

    /// Largest spread (max - min) of any column in the `v'` block.
    pub fn v_prime_variation(&self) -> f64 {
        self.block_variation(self.n_u())
    }

    fn block_variation(&self, offset: usize) -> f64 {
        (offset..offset + self.n_u())
            .map(|c| {
                let col = self.rows.column(c);
                col.max() - col.min()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Direct,
    Subtracted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub variant: Variant,
    pub group_count: usize,
    pub required_rank: usize,
    pub achieved_rank: usize,
    /// 2 * number of grouped latent coordinates
    pub ambient_dim: usize,
    pub rows_used: usize,
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub v_variation: f64,
    pub v_prime_variation: f64,
    /// blocks that do not change across conditioning samples
    pub constant_blocks: Vec<String>,
    /// the condition is checked at this many latent evaluation points only
    pub evaluation_points: usize,
}

/// Singular values in descending order and the count above `tol * max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> (Vec<f64>, usize) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (Vec::new(), 0);
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let largest = sv[0];
    let rank = if largest > 0.0 { sv.iter().filter(|&&s| s > tol * largest).count() } else { 0 };
    (sv, rank)
}

fn report(w: &WMatrix, variant: Variant, d: usize, tol: f64, m: &DMatrix<f64>) -> RankReport {
    let (singular_values, achieved_rank) = numerical_rank(m, tol);
    let required_rank = 2 * d;
    let (v_variation, v_prime_variation) = (w.v_variation(), w.v_prime_variation());
    let mut constant_blocks = Vec::new();
    if w.rows.nrows() > 1 {
        if v_variation < CONSTANT_BLOCK_TOLERANCE {
            constant_blocks.push("v".to_string());
        }
        if v_prime_variation < CONSTANT_BLOCK_TOLERANCE {
            constant_blocks.push("v'".to_string());
        }
    }
    RankReport {
        variant,
        group_count: d,
        required_rank,
        achieved_rank,
        ambient_dim: w.rows.ncols(),
        rows_used: m.nrows(),
        singular_values,
        tolerance: tol,
        verdict: if achieved_rank >= required_rank { Verdict::Satisfied } else { Verdict::Violated },
        v_variation,
        v_prime_variation,
        constant_blocks,
        evaluation_points: 1,
    }
}

/// The rows themselves must reach rank `2d`.
pub fn check_rank_direct(w: &WMatrix, d: usize, tol: f64) -> Result<RankReport> {
    let m = w.rows.nrows();
    if m < 2 * d {
        return Err(Error::TooFewSamples { needed: 2 * d, got: m });
    }
    Ok(report(w, Variant::Direct, d, tol, &w.rows))
}

/// The differences `w_i - w_0` must reach rank `2d`.
pub fn check_rank_subtracted(w: &WMatrix, d: usize, tol: f64) -> Result<RankReport> {
    let m = w.rows.nrows();
    if m < 2 * d + 1 || m == 0 {
        return Err(Error::TooFewSamples { needed: 2 * d + 1, got: m });
    }
    let base = w.rows.row(0).into_owned();
    let diffs = DMatrix::from_fn(m - 1, w.rows.ncols(), |r, c| w.rows[(r + 1, c)] - base[c]);
    Ok(report(w, Variant::Subtracted, d, tol, &diffs))
}

pub fn check_rank(w: &WMatrix, variant: Variant, d: usize, tol: f64) -> Result<RankReport> {
    match variant {
        Variant::Direct => check_rank_direct(w, d, tol),
        Variant::Subtracted => check_rank_subtracted(w, d, tol),
    }
}

/// Builds the `w` rows of a Gaussian SCM for `partition` and checks them.
///
/// One joint draw supplies the evaluation point of the grouped latents;
/// `samples` further draws supply the conditioning values.
pub fn check_scm(
    spec: &ScmSpec,
    partition: &LatentPartition,
    variant: Variant,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<RankReport> {
    let w = scm_w_matrix(spec, partition, samples, seed)?;
    check_rank(&w, variant, partition.group_count(), tol)
}

pub fn scm_w_matrix(
    spec: &ScmSpec,
    partition: &LatentPartition,
    samples: usize,
    seed: u64,
) -> Result<WMatrix> {
    let given = &partition.conditioning;
    let zeros = vec![0.0; given.len()];
    let conditionals = partition
        .groups
        .iter()
        .map(|g| conditional(spec, g, given, &zeros))
        .collect::<Result<Vec<_>>>()?;
    let draws = sample(&spec.with_seed(seed), samples + 1)?;
    let point: Vec<f64> = partition.grouped_nodes().iter().map(|id| draws.data[(0, id.0)]).collect();
    let z_o_samples: Vec<Vec<f64>> = (1..=samples)
        .map(|r| given.iter().map(|id| draws.data[(r, id.0)]).collect())
        .collect();
    let sizes = partition.groups.iter().map(|g| g.len()).collect();
    WMatrix::build(point, z_o_samples, sizes, |p, z_o| gaussian_w_row(&conditionals, p, z_o))
}
