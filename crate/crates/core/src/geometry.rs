//! Vector geometry for subspace projection: orthogonal-complement
//! projections, deterministic direction families, best-direction selection
//! and closest points between lines.

use nalgebra::DVector;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type RealVec = DVector<f64>;

const UNIT_TOL: f64 = 1e-12;

/// A unit vector in R^k, ||v||_2 = 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: RealVec,
}

impl UnitVector {
    /// Wraps `coords`, normalizing it. Rejects the zero vector.
    pub fn new(coords: RealVec) -> Result<Self> {
        let norm = coords.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(Self {
            coords: coords / norm,
        })
    }

    /// Wraps coordinates that are already unit length within tolerance.
    pub fn from_unit(coords: RealVec) -> Result<Self> {
        if (coords.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!(
                "vector has norm {}, not unit",
                coords.norm()
            )));
        }
        Ok(Self { coords })
    }

    pub fn from_angle(theta: f64) -> Self {
        Self {
            coords: RealVec::from_vec(vec![theta.cos(), theta.sin()]),
        }
    }

    /// The 1D "direction" along the positive axis.
    pub fn axis_1d() -> Self {
        Self {
            coords: RealVec::from_vec(vec![1.0]),
        }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &RealVec {
        &self.coords
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.coords.dot(&other.coords)
    }

    /// In R^2, the counter-clockwise perpendicular (-y, x).
    pub fn perp_2d(&self) -> Result<UnitVector> {
        if self.dimension() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.dimension(),
            });
        }
        Ok(UnitVector {
            coords: RealVec::from_vec(vec![-self.coords[1], self.coords[0]]),
        })
    }

    /// A deterministic orthonormal basis (b1, b2) of the plane orthogonal to
    /// `self` in R^3.
    pub fn orthonormal_complement_3d(&self) -> Result<[UnitVector; 2]> {
        if self.dimension() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: self.dimension(),
            });
        }
        // Seed with the canonical axis least aligned with self.
        let v = &self.coords;
        let (mut ax, mut best) = (0usize, v[0].abs());
        for i in 1..3 {
            if v[i].abs() < best {
                best = v[i].abs();
                ax = i;
            }
        }
        let mut e = RealVec::zeros(3);
        e[ax] = 1.0;
        let b1 = UnitVector::new(project_complement(&e, self))?;
        let b2 = RealVec::from_vec(vec![
            v[1] * b1.coords[2] - v[2] * b1.coords[1],
            v[2] * b1.coords[0] - v[0] * b1.coords[2],
            v[0] * b1.coords[1] - v[1] * b1.coords[0],
        ]);
        Ok([b1, UnitVector::new(b2)?])
    }
}

/// An ordered set of unit directions used for subspace projection.
#[derive(Debug, Clone)]
pub struct DirectionFamily {
    pub dimension: usize,
    pub vectors: Vec<UnitVector>,
    /// Grid count the family was built from.
    pub parameter: usize,
}

impl DirectionFamily {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// A line `point + lambda * direction`.
#[derive(Debug, Clone)]
pub struct Line {
    pub point: RealVec,
    pub direction: UnitVector,
}

impl Line {
    pub fn new(point: RealVec, direction: UnitVector) -> Result<Self> {
        if point.len() != direction.dimension() {
            return Err(Error::DimensionMismatch {
                expected: direction.dimension(),
                got: point.len(),
            });
        }
        Ok(Self { point, direction })
    }

    pub fn at(&self, lambda: f64) -> RealVec {
        &self.point + self.direction.coords() * lambda
    }
}

/// Orthogonal projection of `u` onto the complement of `v`: u - (u.v) v.
pub fn project_complement(u: &RealVec, v: &UnitVector) -> RealVec {
    u - v.coords() * u.dot(v.coords())
}

/// The N directions v(theta_q) = (cos theta_q, sin theta_q), theta_q = q pi / N.
pub fn family_2d(n_dirs: usize) -> Result<DirectionFamily> {
    if n_dirs == 0 {
        return Err(Error::InvalidArgument("family size must be >= 1".into()));
    }
    let vectors = (1..=n_dirs)
        .map(|q| UnitVector::from_angle(q as f64 * PI / n_dirs as f64))
        .collect();
    Ok(DirectionFamily {
        dimension: 2,
        vectors,
        parameter: n_dirs,
    })
}

/// The N^2 directions v(phi1, phi2) = (cos phi1 sin phi2, sin phi1 sin phi2,
/// cos phi2) on the grid phi1, phi2 in {pi/2N, ..., pi/2}, ordered
/// lexicographically in (phi1, phi2).
pub fn family_3d(n_grid: usize) -> Result<DirectionFamily> {
    if n_grid == 0 {
        return Err(Error::InvalidArgument("family size must be >= 1".into()));
    }
    let step = PI / (2.0 * n_grid as f64);
    let mut vectors = Vec::with_capacity(n_grid * n_grid);
    for i in 1..=n_grid {
        let phi1 = i as f64 * step;
        for j in 1..=n_grid {
            let phi2 = j as f64 * step;
            vectors.push(UnitVector {
                coords: RealVec::from_vec(vec![
                    phi1.cos() * phi2.sin(),
                    phi1.sin() * phi2.sin(),
                    phi2.cos(),
                ]),
            });
        }
    }
    Ok(DirectionFamily {
        dimension: 3,
        vectors,
        parameter: n_grid,
    })
}

/// Planar family tied to the source count: v_q = (cos 2q delta, sin 2q delta)
/// with delta = pi / (n (n + 1)), q = 1 .. n(n+1)/2. For any n distinct
/// points some member keeps the projected separation above
/// 2 d_min / (n (n + 1)).
pub fn count_matched_family_2d(n: usize) -> Result<DirectionFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "count-matched family needs n >= 2".into(),
        ));
    }
    let delta = PI / (n as f64 * (n as f64 + 1.0));
    let count = n * (n + 1) / 2;
    let vectors = (1..=count)
        .map(|q| UnitVector::from_angle(2.0 * q as f64 * delta))
        .collect();
    Ok(DirectionFamily {
        dimension: 2,
        vectors,
        parameter: count,
    })
}

/// Spherical-coordinate grid family with angular spacing `theta`:
/// N = floor(pi / 2 theta) steps per angle, N^{k-1} vectors, ordered
/// lexicographically in the angle indices. Every distinct pair (v, w)
/// satisfies 0 <= v . w <= cos(theta).
pub fn appendix_family(k: usize, theta: f64) -> Result<DirectionFamily> {
    if k < 2 {
        return Err(Error::InvalidArgument("dimension must be >= 2".into()));
    }
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "theta must lie in (0, pi/2), got {theta}"
        )));
    }
    let n_grid = (PI / (2.0 * theta)).floor() as usize;
    if n_grid == 0 {
        return Err(Error::InvalidArgument(
            "theta too close to pi/2: empty grid".into(),
        ));
    }
    let mut vectors = Vec::with_capacity(n_grid.pow(k as u32 - 1));
    let mut index = vec![1usize; k - 1];
    loop {
        let angles: Vec<f64> = index.iter().map(|&t| t as f64 * theta).collect();
        vectors.push(UnitVector {
            coords: RealVec::from_vec(spherical_point(k, &angles)),
        });
        // lexicographic increment, last index fastest
        let mut pos = k - 1;
        loop {
            if pos == 0 {
                return Ok(DirectionFamily {
                    dimension: k,
                    vectors,
                    parameter: n_grid,
                });
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] <= n_grid {
                break;
            }
            index[pos] = 1;
        }
    }
}

/// Point on the unit sphere in R^k with the spherical angles
/// x1 = cos phi1, x2 = sin phi1 cos phi2, ..., xk = sin phi1 ... sin phi_{k-1}.
fn spherical_point(k: usize, angles: &[f64]) -> Vec<f64> {
    debug_assert_eq!(angles.len(), k - 1);
    let mut coords = Vec::with_capacity(k);
    let mut sin_prod = 1.0;
    for &phi in angles {
        coords.push(sin_prod * phi.cos());
        sin_prod *= phi.sin();
    }
    coords.push(sin_prod);
    coords
}

/// Minimum pairwise separation of `points` after projecting out direction `v`.
/// Errors on duplicate points (they violate the n-sparse premise).
pub fn min_projected_separation(points: &[RealVec], v: &UnitVector) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 points to measure separation".into(),
        ));
    }
    let mut min_sep = f64::INFINITY;
    for p in 0..points.len() {
        for j in (p + 1)..points.len() {
            let diff = &points[p] - &points[j];
            if diff.norm() == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate points at indices {p} and {j}"
                )));
            }
            let sep = project_complement(&diff, v).norm();
            min_sep = min_sep.min(sep);
        }
    }
    Ok(min_sep)
}

/// Scores every family vector by the minimum projected pairwise separation of
/// `points` and returns the `count` best, sorted decreasing. Ties are broken
/// by family enumeration order.
pub fn best_directions(
    points: &[RealVec],
    family: &DirectionFamily,
    count: usize,
) -> Result<Vec<(UnitVector, f64)>> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty direction family".into()));
    }
    if count > family.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} directions from a family of {}",
            family.len()
        )));
    }
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(family.len());
    for (idx, v) in family.vectors.iter().enumerate() {
        scored.push((idx, min_projected_separation(points, v)?));
    }
    // stable sort keeps family order among equal scores
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    Ok(scored
        .into_iter()
        .take(count)
        .map(|(idx, sep)| (family.vectors[idx].clone(), sep))
        .collect())
}

/// Closest points between two lines.
#[derive(Debug, Clone)]
pub struct ClosestPoints {
    pub c1: RealVec,
    pub c2: RealVec,
    pub distance: f64,
    /// Set when |d1 . d2| > 1 - 1e-10; callers should reject such pairs.
    pub parallel: bool,
}

const PARALLEL_TOL: f64 = 1e-10;

/// Points c1 on `l1` and c2 on `l2` minimizing ||c1 - c2||. For parallel lines
/// the minimum-parameter representative pair is returned with the `parallel`
/// flag set.
pub fn closest_points(l1: &Line, l2: &Line) -> Result<ClosestPoints> {
    if l1.point.len() != l2.point.len() {
        return Err(Error::DimensionMismatch {
            expected: l1.point.len(),
            got: l2.point.len(),
        });
    }
    let d1 = l1.direction.coords();
    let d2 = l2.direction.coords();
    let w = &l1.point - &l2.point;
    let b = d1.dot(d2);
    let d = d1.dot(&w);
    let e = d2.dot(&w);
    if b.abs() > 1.0 - PARALLEL_TOL {
        let c1 = l1.point.clone();
        let c2 = l2.at(e);
        let distance = (&c1 - &c2).norm();
        return Ok(ClosestPoints {
            c1,
            c2,
            distance,
            parallel: true,
        });
    }
    let denom = 1.0 - b * b;
    let t1 = (b * e - d) / denom;
    let t2 = (e - b * d) / denom;
    let c1 = l1.at(t1);
    let c2 = l2.at(t2);
    let distance = (&c1 - &c2).norm();
    Ok(ClosestPoints {
        c1,
        c2,
        distance,
        parallel: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v2(x: f64, y: f64) -> RealVec {
        RealVec::from_vec(vec![x, y])
    }

    fn v3(x: f64, y: f64, z: f64) -> RealVec {
        RealVec::from_vec(vec![x, y, z])
    }

    #[test]
    fn project_complement_removes_component() {
        let v = UnitVector::from_unit(v2(1.0, 0.0)).unwrap();
        let p = project_complement(&v2(3.0, 4.0), &v);
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn project_complement_keeps_orthogonal() {
        let v = UnitVector::from_unit(v3(0.0, 0.0, 1.0)).unwrap();
        let p = project_complement(&v3(1.0, 1.0, 0.0), &v);
        assert_abs_diff_eq!((p - v3(1.0, 1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn family_2d_small_cases() {
        let f = family_2d(2).unwrap();
        assert_eq!(f.len(), 2);
        assert_abs_diff_eq!(f.vectors[0].coords()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.vectors[0].coords()[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.vectors[1].coords()[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.vectors[1].coords()[1], 0.0, epsilon = 1e-12);

        let f4 = family_2d(4).unwrap();
        let third = &f4.vectors[2];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(third.coords()[0], -r, epsilon = 1e-12);
        assert_abs_diff_eq!(third.coords()[1], r, epsilon = 1e-12);

        assert!(family_2d(0).is_err());
    }

    #[test]
    fn family_2d_pairwise_angles() {
        let f = family_2d(10).unwrap();
        assert_eq!(f.len(), 10);
        for p in 0..10 {
            for j in (p + 1)..10 {
                let cosang = f.vectors[p].dot(&f.vectors[j]).abs();
                // pairwise angle at least pi/10
                assert!(cosang <= (PI / 10.0).cos() + 1e-12);
            }
        }
    }

    #[test]
    fn family_3d_small_cases() {
        let f1 = family_3d(1).unwrap();
        assert_eq!(f1.len(), 1);
        assert_abs_diff_eq!(
            (f1.vectors[0].coords() - v3(0.0, 1.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-12
        );

        let f2 = family_3d(2).unwrap();
        assert_eq!(f2.len(), 4);
        let expect = v3(0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2);
        assert!(f2
            .vectors
            .iter()
            .any(|v| (v.coords() - &expect).norm() < 1e-12));
        for v in &f2.vectors {
            assert_abs_diff_eq!(v.coords().norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn appendix_family_2d_angles() {
        let f = appendix_family(2, PI / 6.0).unwrap();
        assert_eq!(f.len(), 3);
        for (q, v) in f.vectors.iter().enumerate() {
            let ang = (q + 1) as f64 * PI / 6.0;
            assert_abs_diff_eq!(v.coords()[0], ang.cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(v.coords()[1], ang.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn appendix_family_3d_dot_products() {
        let theta = PI / 4.0;
        let f = appendix_family(3, theta).unwrap();
        assert_eq!(f.len(), 4);
        for p in 0..4 {
            for j in (p + 1)..4 {
                let dot = f.vectors[p].dot(&f.vectors[j]);
                assert!(dot >= -1e-12 && dot < 1.0 - 1e-12, "dot = {dot}");
            }
        }
        // The cos(theta) pairwise cap does NOT hold for k = 3: two grid
        // vectors sharing phi1 and differing by theta in phi2 have dot
        // cos^2(phi1) + sin^2(phi1) cos(theta) > cos(theta) whenever
        // sin(phi1) < 1. Pin the counterexample so the deviation is tracked.
        let v11 = &f.vectors[0]; // (phi1, phi2) = (pi/4, pi/4)
        let v12 = &f.vectors[1]; // (phi1, phi2) = (pi/4, pi/2)
        let expected = 0.5 + 0.5 * theta.cos();
        assert_abs_diff_eq!(v11.dot(v12), expected, epsilon = 1e-12);
        assert!(v11.dot(v12) > theta.cos());
    }

    #[test]
    fn appendix_family_2d_pairwise_cap_holds() {
        // in the plane the grid angles differ by at least theta, so the
        // pairwise cap is exact
        for n_grid in 2..=8usize {
            let theta = PI / (2.0 * n_grid as f64 + 0.5);
            let f = appendix_family(2, theta).unwrap();
            for p in 0..f.len() {
                for j in (p + 1)..f.len() {
                    let dot = f.vectors[p].dot(&f.vectors[j]);
                    assert!(dot >= -1e-12 && dot <= theta.cos() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn appendix_family_near_right_angle() {
        let f = appendix_family(2, PI / 2.0 - 1e-9).unwrap();
        assert_eq!(f.len(), 1);
        assert!(appendix_family(2, PI / 2.0).is_err());
    }

    #[test]
    fn best_directions_simple() {
        let family = DirectionFamily {
            dimension: 2,
            vectors: vec![
                UnitVector::from_unit(v2(1.0, 0.0)).unwrap(),
                UnitVector::from_unit(v2(0.0, 1.0)).unwrap(),
            ],
            parameter: 2,
        };
        let pts = [v2(0.0, 0.0), v2(1.0, 0.0)];
        let best = best_directions(&pts, &family, 1).unwrap();
        assert_abs_diff_eq!(best[0].0.coords()[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best[0].1, 1.0, epsilon = 1e-12);

        let pts2 = [v2(0.0, 0.0), v2(0.0, 1.0)];
        let best2 = best_directions(&pts2, &family, 2).unwrap();
        assert_abs_diff_eq!(best2[0].0.coords()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best2[0].1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best2[1].1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn best_directions_matches_exhaustive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let family = family_2d(20).unwrap();
        for _ in 0..20 {
            let pts: Vec<RealVec> = (0..4)
                .map(|_| v2(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let got = best_directions(&pts, &family, 2).unwrap();
            // independent scoring
            let mut oracle: Vec<(usize, f64)> = family
                .vectors
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let mut m = f64::INFINITY;
                    for p in 0..4 {
                        for j in 0..4 {
                            if p != j {
                                let d = project_complement(&(&pts[p] - &pts[j]), v).norm();
                                m = m.min(d);
                            }
                        }
                    }
                    (i, m)
                })
                .collect();
            oracle.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            for rank in 0..2 {
                assert_abs_diff_eq!(got[rank].1, oracle[rank].1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn best_directions_rejects_degenerate() {
        let family = family_2d(4).unwrap();
        let dup = [v2(0.5, 0.5), v2(0.5, 0.5)];
        assert!(best_directions(&dup, &family, 1).is_err());
        let single = [v2(0.0, 0.0)];
        assert!(best_directions(&single, &family, 1).is_err());
    }

    #[test]
    fn closest_points_skew_lines() {
        let l1 = Line::new(v3(0.0, 0.0, 0.0), UnitVector::from_unit(v3(1.0, 0.0, 0.0)).unwrap())
            .unwrap();
        let l2 = Line::new(v3(0.0, 1.0, 1.0), UnitVector::from_unit(v3(0.0, 0.0, 1.0)).unwrap())
            .unwrap();
        let cp = closest_points(&l1, &l2).unwrap();
        assert!(!cp.parallel);
        assert_abs_diff_eq!(cp.distance, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!((&cp.c1 - v3(0.0, 0.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((&cp.c2 - v3(0.0, 1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closest_points_intersecting() {
        let l1 = Line::new(v3(0.0, 0.0, 0.0), UnitVector::from_unit(v3(1.0, 0.0, 0.0)).unwrap())
            .unwrap();
        let l2 = Line::new(
            v3(0.0, 0.0, 0.0),
            UnitVector::new(v3(1.0, 1.0, 0.0)).unwrap(),
        )
        .unwrap();
        let cp = closest_points(&l1, &l2).unwrap();
        assert_abs_diff_eq!(cp.distance, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cp.c1.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closest_points_planar_intersection() {
        let l1 = Line::new(v2(0.0, 1.0), UnitVector::from_unit(v2(1.0, 0.0)).unwrap()).unwrap();
        let l2 = Line::new(v2(2.0, 0.0), UnitVector::from_unit(v2(0.0, 1.0)).unwrap()).unwrap();
        let cp = closest_points(&l1, &l2).unwrap();
        assert_abs_diff_eq!(cp.distance, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((&cp.c1 - v2(2.0, 1.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((&cp.c1 - &cp.c2).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closest_points_parallel_flagged() {
        let l1 = Line::new(v3(0.0, 0.0, 0.0), UnitVector::from_unit(v3(1.0, 0.0, 0.0)).unwrap())
            .unwrap();
        let l2 = Line::new(v3(0.0, 1.0, 0.0), UnitVector::from_unit(v3(1.0, 0.0, 0.0)).unwrap())
            .unwrap();
        let cp = closest_points(&l1, &l2).unwrap();
        assert!(cp.parallel);
        assert_abs_diff_eq!(cp.distance, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closest_points_beats_random_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let l1 = Line::new(
            v3(0.3, -0.2, 0.9),
            UnitVector::new(v3(1.0, 2.0, -0.5)).unwrap(),
        )
        .unwrap();
        let l2 = Line::new(
            v3(-0.5, 0.7, 0.1),
            UnitVector::new(v3(-0.3, 1.0, 1.2)).unwrap(),
        )
        .unwrap();
        let cp = closest_points(&l1, &l2).unwrap();
        for _ in 0..100 {
            let a = l1.at(rng.gen_range(-10.0..10.0));
            let b = l2.at(rng.gen_range(-10.0..10.0));
            assert!(cp.distance <= (a - b).norm() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn projection_pythagoras(ux in -5.0f64..5.0, uy in -5.0f64..5.0, uz in -5.0f64..5.0,
                                 theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI)) {
            let u = v3(ux, uy, uz);
            let v = UnitVector::new(v3(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ));
            prop_assume!(v.is_ok());
            let v = v.unwrap();
            let p = project_complement(&u, &v);
            let along = u.dot(v.coords());
            prop_assert!((p.norm_squared() + along * along - u.norm_squared()).abs() < 1e-10);
            // idempotence
            let pp = project_complement(&p, &v);
            prop_assert!((pp - &p).norm() < 1e-12);
            // orthogonality
            prop_assert!(p.dot(v.coords()).abs() < 1e-12 * (1.0 + u.norm()));
        }
    }
}
