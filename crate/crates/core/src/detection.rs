//! Source-count detection by Hankel singular-value thresholding: fixed order,
//! sweep over orders, and 2D/3D sweeps over projection directions.

use crate::error::{Error, Result};
use crate::geometry::{DirectionFamily, UnitVector};
use crate::model::{DiscreteMeasure, Measurement, MeasurementOracle};
use crate::spectral::{build_hankel, sample_line, singular_values, LineSamples};

/// Relative floor added to the threshold so that noiseless (sigma = 0)
/// detection still counts numerical rank instead of everything above zero.
const RANK_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DetectionConfig {
    pub noise_level: f64,
    pub max_order: usize,
    pub family_size: usize,
}

impl DetectionConfig {
    pub fn new(noise_level: f64, max_order: usize, family_size: usize) -> Result<Self> {
        if noise_level < 0.0 {
            return Err(Error::InvalidArgument(
                "noise level must be nonnegative".into(),
            ));
        }
        if max_order == 0 || family_size == 0 {
            return Err(Error::InvalidArgument(
                "max order and family size must be >= 1".into(),
            ));
        }
        Ok(Self {
            noise_level,
            max_order,
            family_size,
        })
    }
}

/// Per-direction outcome of a sweep.
#[derive(Debug, Clone)]
pub struct DirectionDetection {
    /// The projection direction v; the samples run along a line in v-perp.
    pub direction: UnitVector,
    pub count: usize,
    /// Hankel order at which `count` was attained.
    pub order: usize,
    /// Singular values at that order, sorted decreasing.
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub count: usize,
    pub per_direction: Vec<DirectionDetection>,
    /// Index into `per_direction` of the first direction attaining `count`.
    pub winner: usize,
}

/// Number of singular values above (s+1) sigma; the floor term keeps the
/// threshold positive in the noiseless case.
pub fn detect_fixed_s(samples: &LineSamples, sigma: f64) -> Result<usize> {
    let sv = singular_values(&build_hankel(samples))?;
    Ok(count_above_threshold(&sv, samples.order(), sigma))
}

fn count_above_threshold(sv: &[f64], s: usize, sigma: f64) -> usize {
    let threshold = (s as f64 + 1.0) * sigma + RANK_FLOOR * sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&v| v > threshold).count()
}

/// Sweep outcome along a single line: max count over s = 1..=s_max.
pub(crate) struct SweepOutcome {
    pub(crate) count: usize,
    pub(crate) order: usize,
    pub(crate) singular_values: Vec<f64>,
}

pub(crate) fn sweep_line_inner(
    oracle: &dyn Measurement,
    direction: &UnitVector,
    sigma: f64,
    s_max: usize,
) -> Result<SweepOutcome> {
    if s_max == 0 {
        return Err(Error::InvalidArgument("max order must be >= 1".into()));
    }
    let mut best = SweepOutcome {
        count: 0,
        order: 1,
        singular_values: Vec::new(),
    };
    for s in 1..=s_max {
        let samples = sample_line(oracle, direction, s)?;
        let sv = singular_values(&build_hankel(&samples))?;
        let count = count_above_threshold(&sv, s, sigma);
        if count > best.count || s == 1 {
            best = SweepOutcome {
                count,
                order: s,
                singular_values: sv,
            };
        }
    }
    Ok(best)
}

/// Max detected count along the line spanned by `direction`, sweeping the
/// Hankel order from 1 to s_max with fresh samples at each order.
pub fn sweep_line(
    oracle: &dyn Measurement,
    direction: &UnitVector,
    sigma: f64,
    s_max: usize,
) -> Result<usize> {
    Ok(sweep_line_inner(oracle, direction, sigma, s_max)?.count)
}

/// 1D convenience: sweep along the canonical axis of a 1D measurement.
pub fn sweep_detect_1d(oracle: &dyn Measurement, sigma: f64, s_max: usize) -> Result<usize> {
    if oracle.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: oracle.dimension(),
        });
    }
    sweep_line(oracle, &UnitVector::axis_1d(), sigma, s_max)
}

/// 2D sweep: for each projection direction v in family_2d(N), sample along
/// the line spanned by v-perp and take the max detected count.
pub fn detect_2d(
    oracle: &dyn Measurement,
    sigma: f64,
    n_directions: usize,
    s_max: usize,
) -> Result<DetectionResult> {
    if oracle.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: oracle.dimension(),
        });
    }
    let family = crate::geometry::family_2d(n_directions)?;
    detect_2d_with_family(oracle, sigma, &family, s_max)
}

/// Same as [`detect_2d`] with a caller-supplied projection family.
pub fn detect_2d_with_family(
    oracle: &dyn Measurement,
    sigma: f64,
    family: &DirectionFamily,
    s_max: usize,
) -> Result<DetectionResult> {
    let mut per_direction = Vec::with_capacity(family.len());
    for v in &family.vectors {
        let line_dir = v.perp_2d()?;
        let outcome = sweep_line_inner(oracle, &line_dir, sigma, s_max)?;
        per_direction.push(DirectionDetection {
            direction: v.clone(),
            count: outcome.count,
            order: outcome.order,
            singular_values: outcome.singular_values,
        });
    }
    finish_result(per_direction)
}

/// 3D sweep: for each v in family_3d(N), restrict the measurement to the
/// plane v-perp and run the 2D sweep there.
pub fn detect_3d(
    oracle: &dyn Measurement,
    sigma: f64,
    n_directions: usize,
    s_max: usize,
) -> Result<DetectionResult> {
    if oracle.dimension() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: oracle.dimension(),
        });
    }
    let family = crate::geometry::family_3d(n_directions)?;
    let mut per_direction = Vec::with_capacity(family.len());
    for v in &family.vectors {
        let [b1, b2] = v.orthonormal_complement_3d()?;
        let plane = crate::model::RestrictedOracle::new(
            oracle,
            vec![b1.coords().clone(), b2.coords().clone()],
        )?;
        let inner = detect_2d(&plane, sigma, n_directions, s_max)?;
        let win = &inner.per_direction[inner.winner];
        per_direction.push(DirectionDetection {
            direction: v.clone(),
            count: inner.count,
            order: win.order,
            singular_values: win.singular_values.clone(),
        });
    }
    finish_result(per_direction)
}

fn finish_result(per_direction: Vec<DirectionDetection>) -> Result<DetectionResult> {
    let count = per_direction.iter().map(|d| d.count).max().unwrap_or(0);
    let winner = per_direction
        .iter()
        .position(|d| d.count == count)
        .unwrap_or(0);
    Ok(DetectionResult {
        count,
        per_direction,
        winner,
    })
}

/// Singular-value tail/witness check for a planar measure under projection.
#[derive(Debug, Clone)]
pub struct TailCheck {
    /// True when, for every direction, singular values with index > n stay
    /// at or below (s+1) sigma.
    pub tail_ok: bool,
    /// True when some direction pushes the n-th singular value above the
    /// threshold.
    pub witness_exists: bool,
    /// True when d_min clears the separation condition evaluated with the
    /// supplied zeta constant.
    pub separation_satisfied: bool,
    /// Worst tail excess over the threshold (nonpositive when tail_ok).
    pub max_tail_excess: f64,
}

/// Checks the two-sided singular-value claim for a 2D measure: tails beyond
/// the true count never exceed (s+1) sigma, and at sufficient separation
/// some direction certifies the full count. `zeta` is an opaque positive
/// constant in the separation condition.
pub fn theorem51_check(
    measure: &DiscreteMeasure,
    cutoff: f64,
    sigma: f64,
    s: usize,
    family: &DirectionFamily,
    zeta: f64,
    seed: u64,
) -> Result<TailCheck> {
    if measure.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: measure.dimension(),
        });
    }
    if zeta <= 0.0 {
        return Err(Error::InvalidArgument("zeta must be positive".into()));
    }
    let n = measure.len();
    if n == 0 || s < n {
        return Err(Error::InvalidArgument(
            "check needs 1 <= n <= s sources".into(),
        ));
    }
    let oracle = MeasurementOracle::new(measure.clone(), cutoff, sigma, seed)?;
    let threshold = (s as f64 + 1.0) * sigma;
    let mut tail_ok = true;
    let mut witness_exists = false;
    let mut max_tail_excess = f64::NEG_INFINITY;
    for v in &family.vectors {
        let line_dir = v.perp_2d()?;
        let samples = sample_line(&oracle, &line_dir, s)?;
        let sv = singular_values(&build_hankel(&samples))?;
        for &tail in &sv[n..] {
            max_tail_excess = max_tail_excess.max(tail - threshold);
            if tail > threshold + 1e-12 {
                tail_ok = false;
            }
        }
        if sv[n - 1] > threshold {
            witness_exists = true;
        }
    }

    let nf = n as f64;
    let m_min = measure.m_min();
    let bound = (std::f64::consts::PI * s as f64 * nf * (nf + 1.0) / (2.0 * cutoff))
        * ((nf * (s as f64 + 1.0) / (zeta * zeta)) * sigma / m_min)
            .powf(1.0 / (2.0 * nf - 2.0));
    let separation_satisfied = measure.d_min() > bound;

    Ok(TailCheck {
        tail_ok,
        witness_exists,
        separation_satisfied,
        max_tail_excess,
    })
}
