//! Volume-preserving mixing functions x = g(z) with closed-form inverses.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;
use crate::scm::stream_rng;

const MIXING_STREAM: u64 = 2 << 32;

/// Range of the polynomial coefficients in each coupling function.
pub const COUPLING_COEFFICIENT_RANGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingKind {
    SpecialOrthogonal,
    AdditiveCouplingStack,
}

/// One additive coupling layer `(a, b) -> (a, b + t(a))`.
///
/// `a` is the first `split` coordinates, or the remaining ones when `swap`
/// is set. Each output `b_j` gets
/// `t_j(a) = sum_i c1 u_i + c2 u_i^2 + c3 u_i^3` with `u_i = tanh(a_i)`;
/// `coefficients[j][i]` holds `[c1, c2, c3]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingLayer {
    pub split: usize,
    pub swap: bool,
    pub coefficients: Vec<Vec<[f64; 3]>>,
}

impl CouplingLayer {
    fn parts(&self, dim: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        if self.swap {
            (self.split..dim, 0..self.split)
        } else {
            (0..self.split, self.split..dim)
        }
    }

    fn shift(&self, dim: usize, point: &[f64]) -> Vec<f64> {
        let (a, _) = self.parts(dim);
        let u: Vec<f64> = point[a].iter().map(|v| v.tanh()).collect();
        self.coefficients
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&u)
                    .map(|(c, &u)| u * (c[0] + u * (c[1] + u * c[2])))
                    .sum()
            })
            .collect()
    }

    fn apply(&self, dim: usize, point: &mut [f64], sign: f64) {
        let shift = self.shift(dim, point);
        let (_, b) = self.parts(dim);
        for (v, s) in point[b].iter_mut().zip(shift) {
            *v += sign * s;
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.split == 0 || self.split >= dim {
            return Err(Error::InvalidSpec(format!("coupling split {} out of range", self.split)));
        }
        let (a, b) = self.parts(dim);
        if self.coefficients.len() != b.len()
            || self.coefficients.iter().any(|row| row.len() != a.len())
        {
            return Err(Error::InvalidSpec("coupling coefficient shape".into()));
        }
        if self.coefficients.iter().flatten().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coupling coefficient".into()));
        }
        Ok(())
    }
}

/// Self-contained description of a mixing; every coefficient is stored inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MixingSpec {
    SpecialOrthogonal {
        dim: usize,
        seed: u64,
        /// row-major
        matrix: Vec<Vec<f64>>,
    },
    AdditiveCouplingStack {
        dim: usize,
        seed: u64,
        layers: Vec<CouplingLayer>,
    },
}

/// Tolerance on the orthogonality and determinant of stored rotations.
pub const ROTATION_TOLERANCE: f64 = 1e-12;

fn rotation(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, MIXING_STREAM);
    let gaussian = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = gaussian.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

pub fn random_mixing(kind: MixingKind, dim: usize, seed: u64, layers: usize) -> Result<MixingSpec> {
    match kind {
        MixingKind::SpecialOrthogonal => {
            if dim < 1 {
                return Err(Error::DimensionTooSmall { min: 1, got: dim });
            }
            let q = rotation(dim, seed);
            let matrix = (0..dim).map(|r| (0..dim).map(|c| q[(r, c)]).collect()).collect();
            Ok(MixingSpec::SpecialOrthogonal { dim, seed, matrix })
        }
        MixingKind::AdditiveCouplingStack => {
            if dim < 2 {
                return Err(Error::DimensionTooSmall { min: 2, got: dim });
            }
            if layers < 1 {
                return Err(Error::InvalidSpec("at least one coupling layer is required".into()));
            }
            let mut rng = stream_rng(seed, MIXING_STREAM);
            let range = COUPLING_COEFFICIENT_RANGE;
            let layers = (0..layers)
                .map(|l| {
                    let split = rng.random_range(1..dim);
                    let swap = l % 2 == 1;
                    let (a, b) = if swap { (dim - split, split) } else { (split, dim - split) };
                    let coefficients = (0..b)
                        .map(|_| {
                            (0..a)
                                .map(|_| std::array::from_fn(|_| rng.random_range(-range..=range)))
                                .collect()
                        })
                        .collect();
                    CouplingLayer { split, swap, coefficients }
                })
                .collect();
            Ok(MixingSpec::AdditiveCouplingStack { dim, seed, layers })
        }
    }
}

impl MixingSpec {
    pub fn kind(&self) -> MixingKind {
        match self {
            MixingSpec::SpecialOrthogonal { .. } => MixingKind::SpecialOrthogonal,
            MixingSpec::AdditiveCouplingStack { .. } => MixingKind::AdditiveCouplingStack,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MixingSpec::SpecialOrthogonal { dim, .. } | MixingSpec::AdditiveCouplingStack { dim, .. } => *dim,
        }
    }

    /// Checks shapes and, for rotations, orthogonality and unit determinant.
    pub fn validate(&self) -> Result<()> {
        match self {
            MixingSpec::SpecialOrthogonal { dim, matrix, .. } => {
                if matrix.len() != *dim || matrix.iter().any(|r| r.len() != *dim) {
                    return Err(Error::InvalidSpec("rotation matrix shape".into()));
                }
                let q = self.matrix().expect("rotation");
                let gram = q.transpose() * &q - DMatrix::identity(*dim, *dim);
                if gram.abs().max() > ROTATION_TOLERANCE
                    || (q.determinant() - 1.0).abs() > ROTATION_TOLERANCE
                {
                    return Err(Error::InvalidSpec("matrix is not a rotation".into()));
                }
                Ok(())
            }
            MixingSpec::AdditiveCouplingStack { dim, layers, .. } => {
                if *dim < 2 {
                    return Err(Error::DimensionTooSmall { min: 2, got: *dim });
                }
                layers.iter().try_for_each(|l| l.validate(*dim))
            }
        }
    }

    /// The rotation matrix, for the orthogonal kind.
    pub fn matrix(&self) -> Option<DMatrix<f64>> {
        match self {
            MixingSpec::SpecialOrthogonal { dim, matrix, .. } => {
                Some(DMatrix::from_fn(*dim, *dim, |r, c| matrix[r][c]))
            }
            _ => None,
        }
    }

    pub fn forward_point(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z.len())?;
        Ok(match self {
            MixingSpec::SpecialOrthogonal { matrix, .. } => {
                matrix.iter().map(|row| row.iter().zip(z).map(|(q, v)| q * v).sum()).collect()
            }
            MixingSpec::AdditiveCouplingStack { dim, layers, .. } => {
                let mut x = z.to_vec();
                for layer in layers {
                    layer.apply(*dim, &mut x, 1.0);
                }
                x
            }
        })
    }

    pub fn inverse_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(match self {
            MixingSpec::SpecialOrthogonal { dim, matrix, .. } => (0..*dim)
                .map(|c| matrix.iter().zip(x).map(|(row, v)| row[c] * v).sum())
                .collect(),
            MixingSpec::AdditiveCouplingStack { dim, layers, .. } => {
                let mut z = x.to_vec();
                for layer in layers.iter().rev() {
                    layer.apply(*dim, &mut z, -1.0);
                }
                z
            }
        })
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }

    fn map_rows(
        &self,
        input: &SampleMatrix,
        prefix: &str,
        f: impl Fn(&[f64]) -> Result<Vec<f64>>,
    ) -> Result<SampleMatrix> {
        self.check_len(input.ncols())?;
        let (rows, cols) = (input.nrows(), input.ncols());
        let mut out = DMatrix::zeros(rows, cols);
        let mut buf = vec![0.0; cols];
        for r in 0..rows {
            for (c, v) in buf.iter_mut().enumerate() {
                *v = input.data[(r, c)];
            }
            for (c, v) in f(&buf)?.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        let labels = (1..=cols).map(|i| format!("{prefix}{i}")).collect();
        SampleMatrix::new(labels, out)
    }
}

/// Applies `g` row-wise; output columns are labelled `x1..xn`.
pub fn forward(spec: &MixingSpec, z: &SampleMatrix) -> Result<SampleMatrix> {
    spec.map_rows(z, "x", |row| spec.forward_point(row))
}

/// Applies `g^-1` row-wise; output columns are labelled `zhat1..zhatn`.
pub fn inverse(spec: &MixingSpec, x: &SampleMatrix) -> Result<SampleMatrix> {
    spec.map_rows(x, "zhat", |row| spec.inverse_point(row))
}
