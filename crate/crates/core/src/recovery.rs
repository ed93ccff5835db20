//! Multi-dimensional support recovery: per-direction 1D pencil estimates are
//! lifted back along their projection directions, intersected into a
//! candidate grid (2D) or matched via closest points between skew lines (3D),
//! and resolved by enumeration least squares over source assignments.

use std::collections::HashSet;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::detection::{self, sweep_line_inner};
use crate::error::{Error, Result};
use crate::geometry::{closest_points, family_2d, family_3d, Line, RealVec, UnitVector};
use crate::model::{Measurement, OmegaKey, RestrictedOracle, C64};
use crate::pencil::matrix_pencil;
use crate::spectral::sample_line;

/// Maximum source count for exhaustive assignment enumeration (n! fits).
const MAX_ENUM_N: usize = 6;

/// Cap on |v1 . v2| between the two chosen projection directions.
pub const DEFAULT_CORRELATION_CAP: f64 = 0.923_879_532_511_286_7; // cos(pi/8)

/// Relative rank tolerance for the amplitude least-squares system.
const FIT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CandidateGrid {
    pub points: Vec<RealVec>,
    /// (index on line family 1, index on line family 2) per point.
    pub provenance: Vec<(usize, usize)>,
    /// 3D gap filter outcome; always true in 2D.
    pub accepted: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub locations: Vec<RealVec>,
    pub amplitudes: Vec<C64>,
    pub residual: f64,
    /// Chosen projection directions (v1: best separation, v2: second).
    pub direction_1: UnitVector,
    pub direction_2: UnitVector,
    pub grid: CandidateGrid,
    /// Frequency points the amplitude fit used, in this oracle's coordinates.
    pub fit_points: Vec<RealVec>,
    /// Set when the two best directions violated the correlation cap and the
    /// least-correlated fallback pair was used instead.
    pub correlation_fallback: bool,
}

/// Least-squares amplitudes for fixed candidate locations: minimizes
/// ||G a - Y||_2 over the fit set, G columns e^{i z_j . omega}.
pub fn fit_amplitudes(
    locations: &[RealVec],
    oracle: &dyn Measurement,
    fit_set: &[RealVec],
) -> Result<(Vec<C64>, f64)> {
    let n = locations.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no candidate locations".into()));
    }
    if fit_set.len() < n {
        return Err(Error::InvalidArgument(format!(
            "fit set of {} points cannot determine {n} amplitudes",
            fit_set.len()
        )));
    }
    let g = DMatrix::from_fn(fit_set.len(), n, |r, c| {
        let phase = locations[c].dot(&fit_set[r]);
        C64::new(phase.cos(), phase.sin())
    });
    let mut y = DVector::zeros(fit_set.len());
    for (r, omega) in fit_set.iter().enumerate() {
        y[r] = oracle.query(omega)?;
    }
    let svd = g
        .clone()
        .try_svd(true, true, f64::EPSILON, 1000)
        .ok_or(Error::SvdNoConvergence)?;
    let sv = &svd.singular_values;
    if sv[sv.len() - 1] < FIT_RANK_TOL * sv[0] {
        return Err(Error::IllConditioned(
            "rank-deficient fit matrix: candidate locations nearly coincide".into(),
        ));
    }
    let a = svd
        .solve(&y, FIT_RANK_TOL * sv[0])
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let residual = (&g * &a - &y).norm();
    Ok((a.iter().copied().collect(), residual))
}

/// One direction that passed the count gate, with its pencil output.
struct KeptDirection {
    /// Projection direction v.
    v: UnitVector,
    /// Unit vector spanning v-perp (the sampled line).
    u: UnitVector,
    /// Pencil coordinates along u, sorted increasing.
    locs: Vec<f64>,
    /// Min pairwise separation of the projected estimates (inf for n = 1).
    separation: f64,
    /// Frequency points the pencil stage sampled.
    omega_points: Vec<RealVec>,
}

fn min_separation_1d(locs: &[f64]) -> f64 {
    if locs.len() < 2 {
        return f64::INFINITY;
    }
    locs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Picks indices of the best and second-best kept direction by separation,
/// subject to the correlation cap; falls back to the least-correlated partner
/// when no candidate satisfies the cap. Returns (first, second, fell_back).
fn choose_pair(kept: &[KeptDirection], corr_cap: f64) -> Result<(usize, usize, bool)> {
    if kept.len() < 2 {
        return Err(Error::InsufficientProjections { kept: kept.len() });
    }
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_by(|&a, &b| kept[b].separation.partial_cmp(&kept[a].separation).unwrap());
    let first = order[0];
    for &idx in &order[1..] {
        if kept[first].v.dot(&kept[idx].v).abs() <= corr_cap {
            return Ok((first, idx, false));
        }
    }
    // all partners too correlated: take the least correlated one
    let second = *order[1..]
        .iter()
        .min_by(|&&a, &&b| {
            kept[first]
                .v
                .dot(&kept[a].v)
                .abs()
                .partial_cmp(&kept[first].v.dot(&kept[b].v).abs())
                .unwrap()
        })
        .unwrap();
    Ok((first, second, true))
}

fn dedup_points(points: Vec<RealVec>) -> Vec<RealVec> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if seen.insert(OmegaKey::of(&p)) {
            out.push(p);
        }
    }
    out
}

/// 2D support recovery: gate directions on detected count = n, pencil each
/// kept direction, choose the two best by projected separation, intersect
/// the n x n back-projected line pairs, and resolve the assignment by
/// enumeration least squares.
pub fn recover_2d(
    oracle: &dyn Measurement,
    n: usize,
    sigma: f64,
    n_directions: usize,
    s: usize,
) -> Result<RecoveryResult> {
    if oracle.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: oracle.dimension(),
        });
    }
    check_enum_size(n)?;
    let family = family_2d(n_directions)?;
    let s_max = s.max(n);

    let mut kept = Vec::new();
    for v in &family.vectors {
        let u = v.perp_2d()?;
        let sweep = sweep_line_inner(oracle, &u, sigma, s_max)?;
        if sweep.count != n {
            continue;
        }
        let order = sweep.order.max(n);
        let samples = sample_line(oracle, &u, order)?;
        let pr = matrix_pencil(&samples, n)?;
        kept.push(KeptDirection {
            v: v.clone(),
            u,
            separation: min_separation_1d(&pr.locations),
            locs: pr.locations,
            omega_points: samples.omega_points().to_vec(),
        });
    }

    let (i1, i2, fell_back) = choose_pair(&kept, DEFAULT_CORRELATION_CAP)?;

    // candidate grid: intersections of the back-projected lines
    let lines = |k: &KeptDirection| -> Vec<Line> {
        k.locs
            .iter()
            .map(|&y| Line {
                point: k.u.coords() * y,
                direction: k.v.clone(),
            })
            .collect()
    };
    let l1 = lines(&kept[i1]);
    let l2 = lines(&kept[i2]);
    let mut grid = CandidateGrid {
        points: Vec::with_capacity(n * n),
        provenance: Vec::with_capacity(n * n),
        accepted: Vec::with_capacity(n * n),
    };
    for (j, a) in l1.iter().enumerate() {
        for (p, b) in l2.iter().enumerate() {
            let cp = closest_points(a, b)?;
            if cp.parallel {
                return Err(Error::IllConditioned(
                    "chosen projection directions are parallel".into(),
                ));
            }
            grid.points.push(cp.c1);
            grid.provenance.push((j, p));
            grid.accepted.push(true);
        }
    }

    let fit_points = dedup_points(
        kept.iter()
            .flat_map(|k| k.omega_points.iter().cloned())
            .collect(),
    );

    let (assignment, amplitudes, residual) =
        best_assignment(n, &grid, oracle, &fit_points, |j, p| Some(j * n + p))?;
    let locations = assignment
        .iter()
        .map(|&idx| grid.points[idx].clone())
        .collect();

    Ok(RecoveryResult {
        locations,
        amplitudes,
        residual,
        direction_1: kept[i1].v.clone(),
        direction_2: kept[i2].v.clone(),
        grid,
        fit_points,
        correlation_fallback: fell_back,
    })
}

fn check_enum_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("source count must be >= 1".into()));
    }
    if n > MAX_ENUM_N {
        return Err(Error::InvalidArgument(format!(
            "assignment enumeration supports up to {MAX_ENUM_N} sources, got {n}"
        )));
    }
    Ok(())
}

/// Enumerates injective assignments j -> p (indices into the candidate grid
/// via `index(j, p)`, None or unaccepted pairs skipped) and returns the one
/// with the smallest least-squares residual.
fn best_assignment(
    n: usize,
    grid: &CandidateGrid,
    oracle: &dyn Measurement,
    fit_points: &[RealVec],
    index: impl Fn(usize, usize) -> Option<usize>,
) -> Result<(Vec<usize>, Vec<C64>, f64)> {
    // fail early on a source with no accepted candidate at all
    for j in 0..n {
        let any = (0..n).any(|p| {
            index(j, p)
                .map(|idx| grid.accepted[idx])
                .unwrap_or(false)
        });
        if !any {
            return Err(Error::MatchingFailure { source_index: j });
        }
    }
    let mut best: Option<(Vec<usize>, Vec<C64>, f64)> = None;
    let mut last_error: Option<Error> = None;
    for perm in (0..n).permutations(n) {
        let mut indices = Vec::with_capacity(n);
        let mut valid = true;
        for (j, &p) in perm.iter().enumerate() {
            match index(j, p) {
                Some(idx) if grid.accepted[idx] => indices.push(idx),
                _ => {
                    valid = false;
                    break;
                }
            }
        }
        if !valid {
            continue;
        }
        let locations: Vec<RealVec> =
            indices.iter().map(|&idx| grid.points[idx].clone()).collect();
        match fit_amplitudes(&locations, oracle, fit_points) {
            Ok((amps, residual)) => {
                if best.as_ref().map(|b| residual < b.2).unwrap_or(true) {
                    best = Some((indices, amps, residual));
                }
            }
            Err(e) => last_error = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_error.unwrap_or(Error::MatchingFailure { source_index: 0 })
    })
}

/// One plane that passed the 3D count gate, with its in-plane recovery.
struct KeptPlane {
    /// Plane normal v.
    v: UnitVector,
    /// Recovered projections in ambient coordinates (points of v-perp).
    points: Vec<RealVec>,
    separation: f64,
    /// Fit frequencies in ambient coordinates.
    omega_points: Vec<RealVec>,
}

/// 3D support recovery: gate planes on the in-plane detected count, recover
/// in the two best planes, match back-projected normal lines by closest
/// points, and enumerate assignments over the accepted midpoints.
pub fn recover_3d(
    oracle: &dyn Measurement,
    n: usize,
    sigma: f64,
    n_directions: usize,
    inner_directions: usize,
    s: usize,
) -> Result<RecoveryResult> {
    if oracle.dimension() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: oracle.dimension(),
        });
    }
    check_enum_size(n)?;
    let family = family_3d(n_directions)?;
    let s_max = s.max(n);

    let mut kept = Vec::new();
    for v in &family.vectors {
        let [b1, b2] = v.orthonormal_complement_3d()?;
        let plane = RestrictedOracle::new(
            oracle,
            vec![b1.coords().clone(), b2.coords().clone()],
        )?;
        let detected = detection::detect_2d(&plane, sigma, inner_directions, s_max)?;
        if detected.count != n {
            continue;
        }
        let inner = match recover_2d(&plane, n, sigma, inner_directions, s) {
            Ok(r) => r,
            // a gated plane can still fail its inner recovery; skip it
            Err(Error::InsufficientProjections { .. }) => continue,
            Err(e) => return Err(e),
        };
        let points: Vec<RealVec> = inner.locations.iter().map(|c| plane.embed(c)).collect();
        let separation = {
            let mut m = f64::INFINITY;
            for a in 0..points.len() {
                for b in (a + 1)..points.len() {
                    m = m.min((&points[a] - &points[b]).norm());
                }
            }
            m
        };
        let omega_points = inner.fit_points.iter().map(|c| plane.embed(c)).collect();
        kept.push(KeptPlane {
            v: v.clone(),
            points,
            separation,
            omega_points,
        });
    }

    if kept.len() < 2 {
        return Err(Error::InsufficientProjections { kept: kept.len() });
    }
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_by(|&a, &b| kept[b].separation.partial_cmp(&kept[a].separation).unwrap());
    let i1 = order[0];
    let mut i2 = order[1];
    let mut fell_back = false;
    if kept[i1].v.dot(&kept[i2].v).abs() > DEFAULT_CORRELATION_CAP {
        if let Some(&alt) = order[1..]
            .iter()
            .find(|&&idx| kept[i1].v.dot(&kept[idx].v).abs() <= DEFAULT_CORRELATION_CAP)
        {
            i2 = alt;
        } else {
            fell_back = true;
        }
    }

    let gap_cap = kept[i1].separation.min(kept[i2].separation);
    let mut grid = CandidateGrid {
        points: Vec::new(),
        provenance: Vec::new(),
        accepted: Vec::new(),
    };
    for (j, p1) in kept[i1].points.iter().enumerate() {
        for (p, p2) in kept[i2].points.iter().enumerate() {
            let l1 = Line {
                point: p1.clone(),
                direction: kept[i1].v.clone(),
            };
            let l2 = Line {
                point: p2.clone(),
                direction: kept[i2].v.clone(),
            };
            let cp = closest_points(&l1, &l2)?;
            let accepted = !cp.parallel && cp.distance < gap_cap;
            grid.points.push((cp.c1 + cp.c2) * 0.5);
            grid.provenance.push((j, p));
            grid.accepted.push(accepted);
        }
    }

    let fit_points = dedup_points(
        kept[i1]
            .omega_points
            .iter()
            .chain(kept[i2].omega_points.iter())
            .cloned()
            .collect(),
    );

    let (assignment, amplitudes, residual) =
        best_assignment(n, &grid, oracle, &fit_points, |j, p| Some(j * n + p))?;
    let locations = assignment
        .iter()
        .map(|&idx| grid.points[idx].clone())
        .collect();

    Ok(RecoveryResult {
        locations,
        amplitudes,
        residual,
        direction_1: kept[i1].v.clone(),
        direction_2: kept[i2].v.clone(),
        grid,
        fit_points,
        correlation_fallback: fell_back,
    })
}
