//! Line sampling along a 1D subspace, Hankel matrix assembly, and singular
//! values. The Hankel order s controls both the number of samples (2s+1) and
//! the matrix size (s+1).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{RealVec, UnitVector};
use crate::model::{Measurement, C64};

/// Relative floor under which singular values are clamped to zero.
const SV_CLAMP: f64 = 1e-14;

/// 2s+1 equispaced samples along the line {z * direction} with
/// z_t = -Omega + (t-1) Omega / s, t = 1..2s+1.
#[derive(Debug, Clone)]
pub struct LineSamples {
    direction: UnitVector,
    order: usize,
    cutoff: f64,
    values: Vec<C64>,
    omega_points: Vec<RealVec>,
}

impl LineSamples {
    pub fn direction(&self) -> &UnitVector {
        &self.direction
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// The ambient frequency points that were queried, in sample order.
    pub fn omega_points(&self) -> &[RealVec] {
        &self.omega_points
    }

    /// Scalar abscissa of sample t (0-based).
    pub fn abscissa(&self, t: usize) -> f64 {
        let s = self.order as f64;
        -self.cutoff + t as f64 * self.cutoff / s
    }

    /// Wraps externally produced values; used by subsampling and tests.
    pub fn from_values(
        direction: UnitVector,
        order: usize,
        cutoff: f64,
        values: Vec<C64>,
        omega_points: Vec<RealVec>,
    ) -> Result<Self> {
        if values.len() != 2 * order + 1 {
            return Err(Error::InvalidArgument(format!(
                "order {} needs {} values, got {}",
                order,
                2 * order + 1,
                values.len()
            )));
        }
        if omega_points.len() != values.len() {
            return Err(Error::InvalidArgument(
                "one omega point per value required".into(),
            ));
        }
        Ok(Self {
            direction,
            order,
            cutoff,
            values,
            omega_points,
        })
    }
}

/// Samples the measurement along `direction` at the 2s+1 canonical abscissae.
pub fn sample_line(
    oracle: &dyn Measurement,
    direction: &UnitVector,
    s: usize,
) -> Result<LineSamples> {
    if s == 0 {
        return Err(Error::InvalidArgument("order s must be >= 1".into()));
    }
    if direction.dimension() != oracle.dimension() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dimension(),
            got: direction.dimension(),
        });
    }
    let cutoff = oracle.cutoff();
    let mut values = Vec::with_capacity(2 * s + 1);
    let mut omega_points = Vec::with_capacity(2 * s + 1);
    for t in 0..=(2 * s) {
        let z = -cutoff + t as f64 * cutoff / s as f64;
        let omega = direction.coords() * z;
        values.push(oracle.query(&omega)?);
        omega_points.push(omega);
    }
    LineSamples::from_values(direction.clone(), s, cutoff, values, omega_points)
}

/// (s+1) x (s+1) complex Hankel matrix: entry(i, j) = values[i + j].
#[derive(Debug, Clone)]
pub struct HankelMatrix {
    order: usize,
    matrix: DMatrix<C64>,
}

impl HankelMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn from_values(values: &[C64]) -> Result<Self> {
        if values.len() < 3 || values.len() % 2 == 0 {
            return Err(Error::InvalidArgument(
                "Hankel assembly needs an odd number >= 3 of values".into(),
            ));
        }
        let s = (values.len() - 1) / 2;
        let matrix = DMatrix::from_fn(s + 1, s + 1, |i, j| values[i + j]);
        Ok(Self { order: s, matrix })
    }
}

pub fn build_hankel(samples: &LineSamples) -> HankelMatrix {
    // LineSamples guarantees 2s+1 values, so assembly cannot fail.
    HankelMatrix::from_values(samples.values()).expect("well-formed line samples")
}

/// Singular values of the Hankel matrix, sorted decreasing, with entries
/// below SV_CLAMP * leading clamped to zero.
pub fn singular_values(h: &HankelMatrix) -> Result<Vec<f64>> {
    singular_values_of(&h.matrix)
}

/// Singular values of an arbitrary complex matrix (shared with the pencil).
pub fn singular_values_of(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let svd = m
        .clone()
        .try_svd(false, false, f64::EPSILON, 1000)
        .ok_or(Error::SvdNoConvergence)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if let Some(&top) = sv.first() {
        for v in sv.iter_mut() {
            if *v < SV_CLAMP * top {
                *v = 0.0;
            }
        }
    }
    Ok(sv)
}

/// Picks 2s+1 equally spaced entries with stride floor((M-1)/(2s)):
/// 0-based indices 0, q, ..., 2sq.
pub fn subsample(values: &[C64], s: usize) -> Result<Vec<C64>> {
    if s == 0 {
        return Err(Error::InvalidArgument("order s must be >= 1".into()));
    }
    let m = values.len();
    if m < 2 * s + 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for order {s}, got {m}",
            2 * s + 1
        )));
    }
    let q = (m - 1) / (2 * s);
    Ok((0..=(2 * s)).map(|t| values[t * q]).collect())
}
