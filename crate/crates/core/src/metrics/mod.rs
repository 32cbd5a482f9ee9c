//! Scores for recovered latents: Pearson correlation matrix, optimal
//! matching (MCC), and entropy-based disentanglement / completeness.
//!
//! Matching and entropies use absolute correlations; signed values stay in
//! the reported matrix. Sums run over sorted terms so that permuting the
//! estimated columns leaves every score bit-for-bit unchanged.

mod assignment;

pub use assignment::max_weight_assignment;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;

/// Largest dimension accepted by [`best_permutation`].
pub const MAX_MATCHING_DIM: usize = 64;

/// Row or matrix mass below which entropies are undefined.
pub const DEGENERATE_MASS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    /// rows: true latents, columns: estimated latents
    pub values: DMatrix<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl CorrelationMatrix {
    pub fn abs(&self) -> DMatrix<f64> {
        self.values.abs()
    }
}

fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

struct Standardized {
    centered: Vec<f64>,
    sum_sq: f64,
}

// Centering runs on x_i - x_0, which keeps the result unchanged under
// shifts that are exact in floating point.
fn standardize(col: nalgebra::DVectorView<'_, f64>) -> Standardized {
    let first = col[0];
    let shifted: Vec<f64> = col.iter().map(|v| v - first).collect();
    let mean = shifted.iter().sum::<f64>() / shifted.len() as f64;
    let centered: Vec<f64> = shifted.iter().map(|v| v - mean).collect();
    let sum_sq = centered.iter().map(|v| v * v).sum::<f64>();
    Standardized { centered, sum_sq }
}

pub fn correlation_matrix(z: &SampleMatrix, z_hat: &SampleMatrix) -> Result<CorrelationMatrix> {
    if z.nrows() != z_hat.nrows() {
        return Err(Error::RowCountMismatch(z.nrows(), z_hat.nrows()));
    }
    if z.nrows() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: z.nrows() });
    }
    let prepare = |m: &SampleMatrix| -> Result<Vec<Standardized>> {
        (0..m.ncols())
            .map(|c| {
                let s = standardize(m.data.column(c));
                if s.sum_sq == 0.0 {
                    Err(Error::ConstantColumn(m.labels[c].clone()))
                } else {
                    Ok(s)
                }
            })
            .collect()
    };
    let a = prepare(z)?;
    let b = prepare(z_hat)?;
    let values = DMatrix::from_fn(a.len(), b.len(), |i, j| {
        let cross: f64 = a[i].centered.iter().zip(&b[j].centered).map(|(x, y)| x * y).sum();
        (cross / (a[i].sum_sq * b[j].sum_sq).sqrt()).clamp(-1.0, 1.0)
    });
    Ok(CorrelationMatrix {
        values,
        row_labels: z.labels.clone(),
        col_labels: z_hat.labels.clone(),
    })
}

fn require_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

/// Assignment `sigma` (row i -> column sigma[i]) maximizing the summed
/// absolute correlation, with the mean matched |corr| as MCC.
pub fn best_permutation(corr: &CorrelationMatrix) -> Result<(Vec<usize>, f64)> {
    let n = require_square(&corr.values)?;
    if n == 0 {
        return Err(Error::DegenerateMatrix("empty matrix".into()));
    }
    if n > MAX_MATCHING_DIM {
        return Err(Error::MatrixTooLarge(n, MAX_MATCHING_DIM));
    }
    let abs = corr.abs();
    let weights: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| abs[(i, j)]).collect()).collect();
    let sigma = max_weight_assignment(&weights);
    let mcc = sorted_sum(sigma.iter().enumerate().map(|(i, &j)| abs[(i, j)]).collect()) / n as f64;
    Ok((sigma, mcc))
}

/// Normalized Shannon entropy (log base `base`) of a non-negative vector.
/// An all-zero vector carries no information and counts as uniform.
fn entropy(mut weights: Vec<f64>, base: usize) -> f64 {
    weights.sort_by(f64::total_cmp);
    let total: f64 = weights.iter().sum();
    if total <= DEGENERATE_MASS || weights.first() == weights.last() {
        return 1.0;
    }
    let log_base = (base as f64).ln();
    let h: f64 = weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum();
    (h / log_base).clamp(0.0, 1.0)
}

/// (D, C): mean over rows (resp. columns) of 1 - entropy of the normalized
/// absolute correlations.
pub fn dci_scores(corr: &CorrelationMatrix) -> Result<(f64, f64)> {
    let n = require_square(&corr.values)?;
    if n < 2 {
        return Err(Error::DegenerateMatrix("need at least 2 latents".into()));
    }
    let abs = corr.abs();
    if abs.sum() <= DEGENERATE_MASS {
        return Err(Error::DegenerateMatrix("all correlations are zero".into()));
    }
    let rows: Vec<f64> = (0..n)
        .map(|i| 1.0 - entropy(abs.row(i).iter().copied().collect(), n))
        .collect();
    let cols: Vec<f64> = (0..n)
        .map(|j| 1.0 - entropy(abs.column(j).iter().copied().collect(), n))
        .collect();
    Ok((sorted_sum(rows) / n as f64, sorted_sum(cols) / n as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub matching: &'static str,
    pub entropy_base: &'static str,
    pub aggregation: &'static str,
    pub degenerate_mass: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            matching: "max sum of |corr|, exact assignment",
            entropy_base: "n",
            aggregation: "unweighted mean",
            degenerate_mass: DEGENERATE_MASS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// signed Pearson correlations, row-major
    pub correlation: Vec<Vec<f64>>,
    /// 0-indexed column matched to each row
    pub permutation: Vec<usize>,
    pub mcc: f64,
    pub disentanglement: f64,
    pub completeness: f64,
    pub config: EvalConfig,
}

pub fn evaluate(z: &SampleMatrix, z_hat: &SampleMatrix) -> Result<EvalReport> {
    let corr = correlation_matrix(z, z_hat)?;
    let (permutation, mcc) = best_permutation(&corr)?;
    let (disentanglement, completeness) = dci_scores(&corr)?;
    let n = corr.values.nrows();
    Ok(EvalReport {
        correlation: (0..n).map(|i| corr.values.row(i).iter().copied().collect()).collect(),
        row_labels: corr.row_labels,
        col_labels: corr.col_labels,
        permutation,
        mcc,
        disentanglement,
        completeness,
        config: EvalConfig::default(),
    })
}
