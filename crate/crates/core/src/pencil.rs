//! 1D support recovery with the matrix pencil method: the generalized
//! eigenvalues of the shifted Hankel blocks are the modulation factors
//! e^{i y_j Omega / s}, whose angles give the locations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::C64;
use crate::spectral::{build_hankel, LineSamples};

/// Relative threshold below which the reduced upper block counts as singular.
const COND_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PencilResult {
    /// Recovered line coordinates, sorted increasing.
    pub locations: Vec<f64>,
    /// Generalized eigenvalues z_j, in the same order as `locations`.
    pub eigenvalues: Vec<C64>,
    /// Smallest singular value kept in either truncated block.
    pub smallest_kept_sv: f64,
    /// max_j | |z_j| - 1 |; grows with the noise level.
    pub unimodularity_drift: f64,
    /// Set when the reduced upper block was numerically singular and the
    /// solve fell back to a pseudo-inverse.
    pub ill_conditioned: bool,
}

struct Truncated {
    u: DMatrix<C64>,
    sigma: DVector<f64>,
    v: DMatrix<C64>,
}

fn truncated_svd(m: &DMatrix<C64>, rank: usize) -> Result<Truncated> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 1000)
        .ok_or(Error::SvdNoConvergence)?;
    let u = svd.u.ok_or(Error::SvdNoConvergence)?;
    let v_t = svd.v_t.ok_or(Error::SvdNoConvergence)?;
    Ok(Truncated {
        u: u.columns(0, rank).into_owned(),
        sigma: svd.singular_values.rows(0, rank).into_owned(),
        v: v_t.rows(0, rank).adjoint(),
    })
}

/// Eigenvalues of a general complex matrix via its Schur form.
fn eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let schur = a
        .clone()
        .try_schur(1e-13, 10_000)
        .ok_or(Error::IllConditioned("Schur iteration did not converge".into()))?;
    let (_q, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Recovers `n` line coordinates from samples of order s >= n.
///
/// Angles live on the branch (-pi, pi], so callers must keep
/// |y_j| Omega / s < pi or locations wrap.
pub fn matrix_pencil(samples: &LineSamples, n: usize) -> Result<PencilResult> {
    let s = samples.order();
    if n == 0 {
        return Err(Error::InvalidArgument("source count must be >= 1".into()));
    }
    if n > s {
        return Err(Error::InvalidArgument(format!(
            "source count {n} exceeds Hankel order {s}"
        )));
    }
    let h = build_hankel(samples);
    let full = h.matrix();
    let h_u = full.rows(0, s).into_owned();
    let h_l = full.rows(1, s).into_owned();

    let tu = truncated_svd(&h_u, n)?;
    let tl = truncated_svd(&h_l, n)?;

    // reduced pencil in the shared n-dimensional signal subspace
    let sigma1 = DMatrix::from_diagonal(&tu.sigma.map(|x| C64::new(x, 0.0)));
    let reduced_u = tl.u.adjoint() * &tu.u * sigma1 * tu.v.adjoint() * &tl.v;
    let reduced_l = DMatrix::from_diagonal(&tl.sigma.map(|x| C64::new(x, 0.0)));

    let sv_u = crate::spectral::singular_values_of(&reduced_u)?;
    let ill_conditioned = sv_u[n - 1] < COND_TOL * sv_u[0].max(f64::MIN_POSITIVE);

    // z solves reduced_l x = z reduced_u x
    let a = if !ill_conditioned {
        reduced_u
            .clone()
            .lu()
            .solve(&reduced_l)
            .ok_or_else(|| Error::IllConditioned("LU solve of the reduced pencil failed".into()))?
    } else {
        pseudo_solve(&reduced_u, &reduced_l)?
    };
    let zs = eigenvalues(&a)?;

    let scale = s as f64 / samples.cutoff();
    let mut pairs: Vec<(f64, C64)> = zs.iter().map(|z| (z.arg() * scale, *z)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let smallest_kept_sv = tu
        .sigma
        .iter()
        .chain(tl.sigma.iter())
        .fold(f64::INFINITY, |acc, &x| acc.min(x));
    let unimodularity_drift = zs
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);

    Ok(PencilResult {
        locations: pairs.iter().map(|p| p.0).collect(),
        eigenvalues: pairs.iter().map(|p| p.1).collect(),
        smallest_kept_sv,
        unimodularity_drift,
        ill_conditioned,
    })
}

/// Minimum-norm least-squares solve A X = B via SVD of A.
fn pseudo_solve(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let svd = a
        .clone()
        .try_svd(true, true, f64::EPSILON, 1000)
        .ok_or(Error::SvdNoConvergence)?;
    svd.solve(b, COND_TOL)
        .map_err(|e| Error::IllConditioned(e.to_string()))
}
