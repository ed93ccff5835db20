//! Experiment orchestration: seeded random instances, single trials,
//! phase-diagram sweeps with a logistic boundary fit, and explicit
//! worst-case witness pairs below the resolution limit.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::detection::{detect_2d, detect_3d, sweep_detect_1d};
use crate::error::{Error, Result};
use crate::geometry::RealVec;
use crate::model::{DiscreteMeasure, MeasurementOracle, C64};
use crate::pencil::matrix_pencil;
use crate::recovery::{recover_2d, recover_3d};
use crate::spectral::sample_line;

const PLACEMENT_RETRIES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialMode {
    Number,
    Support,
}

impl TrialMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialMode::Number => "number",
            TrialMode::Support => "support",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub mode: TrialMode,
    pub dimension: usize,
    pub n: usize,
    pub cutoff: f64,
    pub d_min: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl TrialSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("trials need n >= 2".into()));
        }
        if !(self.dimension >= 1 && self.dimension <= 3) {
            return Err(Error::InvalidArgument(
                "trials support dimensions 1..=3".into(),
            ));
        }
        if self.sigma <= 0.0 || self.d_min <= 0.0 || self.cutoff <= 0.0 {
            return Err(Error::InvalidArgument(
                "sigma, d_min, cutoff must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub mode: &'static str,
    pub dim: usize,
    pub n: usize,
    pub log10_srf: f64,
    pub log10_inv_sigma: f64,
    pub seed: u64,
    pub success: bool,
    /// Worst per-source location error (support mode; NaN in number mode).
    pub max_error: f64,
    pub wall_ms: f64,
}

/// Deterministic mix used to derive per-trial seeds from a master seed and a
/// counter, so parallel execution order cannot change any record.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut x = master ^ counter.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// n points inside the admissible ball with min pairwise distance exactly
/// d_min (rejection sample, then rescale about the origin), unit-modulus
/// amplitudes with uniform random phases. Fully determined by the seed.
pub fn random_instance(spec: &TrialSpec) -> Result<DiscreteMeasure> {
    spec.validate()?;
    let k = spec.dimension;
    let n = spec.n;
    let radius = (n as f64 - 1.0) * PI / (2.0 * spec.cutoff);
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    for _ in 0..PLACEMENT_RETRIES {
        // uniform in the ball: gaussian direction, radius ~ U^{1/k}
        let points: Vec<RealVec> = (0..n)
            .map(|_| {
                let g = RealVec::from_iterator(k, (0..k).map(|_| gaussian(&mut rng)));
                let dir = &g / g.norm().max(f64::MIN_POSITIVE);
                let r = radius * rng.gen_range(0.0f64..1.0).powf(1.0 / k as f64);
                dir * r
            })
            .collect();
        let mut current = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                current = current.min((&points[a] - &points[b]).norm());
            }
        }
        if current <= 0.0 || !current.is_finite() {
            continue;
        }
        let scale = spec.d_min / current;
        let scaled: Vec<RealVec> = points.iter().map(|p| p * scale).collect();
        if scaled.iter().any(|p| p.norm() > radius) {
            continue;
        }
        let amplitudes: Vec<C64> = (0..n)
            .map(|_| {
                let phase = rng.gen_range(0.0..(2.0 * PI));
                C64::new(phase.cos(), phase.sin())
            })
            .collect();
        return DiscreteMeasure::new(k, scaled, amplitudes);
    }
    Err(Error::GeometryInfeasible { d_min: spec.d_min })
}

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream simple
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Sweep/order and family-size defaults for trials at source count n.
fn default_s_max(n: usize) -> usize {
    n + 2
}
const FAMILY_2D: usize = 12;
const FAMILY_3D_OUTER: usize = 3;

/// Runs one experiment: detection-mode success means the detected count
/// equals n; support-mode success means every source is located within a
/// third of its own nearest-neighbor distance.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialRecord> {
    spec.validate()?;
    let start = Instant::now();
    let measure = random_instance(spec)?;
    let oracle = MeasurementOracle::new(measure.clone(), spec.cutoff, spec.sigma, spec.seed)?;
    let (success, max_error) = match spec.mode {
        TrialMode::Number => {
            let count = match spec.dimension {
                1 => sweep_detect_1d(&oracle, spec.sigma, default_s_max(spec.n))?,
                2 => detect_2d(&oracle, spec.sigma, FAMILY_2D, default_s_max(spec.n))?.count,
                _ => {
                    detect_3d(&oracle, spec.sigma, FAMILY_3D_OUTER, default_s_max(spec.n))?.count
                }
            };
            (count == spec.n, f64::NAN)
        }
        TrialMode::Support => {
            let recovered: std::result::Result<Vec<RealVec>, Error> = match spec.dimension {
                1 => {
                    let samples = sample_line(
                        &oracle,
                        &crate::geometry::UnitVector::axis_1d(),
                        spec.n,
                    )?;
                    matrix_pencil(&samples, spec.n).map(|r| {
                        r.locations
                            .iter()
                            .map(|&y| RealVec::from_vec(vec![y]))
                            .collect()
                    })
                }
                2 => recover_2d(&oracle, spec.n, spec.sigma, FAMILY_2D, spec.n)
                    .map(|r| r.locations),
                _ => recover_3d(
                    &oracle,
                    spec.n,
                    spec.sigma,
                    FAMILY_3D_OUTER,
                    FAMILY_2D,
                    spec.n,
                )
                .map(|r| r.locations),
            };
            match recovered {
                Ok(locations) => {
                    let mut ok = true;
                    let mut worst: f64 = 0.0;
                    for (j, y) in measure.supports().iter().enumerate() {
                        let e_j = locations
                            .iter()
                            .map(|l| (l - y).norm())
                            .fold(f64::INFINITY, f64::min);
                        let local_sep = measure
                            .supports()
                            .iter()
                            .enumerate()
                            .filter(|(p, _)| *p != j)
                            .map(|(_, other)| (other - y).norm())
                            .fold(f64::INFINITY, f64::min);
                        worst = worst.max(e_j);
                        if e_j >= local_sep / 3.0 {
                            ok = false;
                        }
                    }
                    (ok, worst)
                }
                // hard failures are unsuccessful trials, not crashes
                Err(_) => (false, f64::INFINITY),
            }
        }
    };
    Ok(TrialRecord {
        mode: spec.mode.as_str(),
        dim: spec.dimension,
        n: spec.n,
        log10_srf: (PI / (spec.cutoff * spec.d_min)).log10(),
        log10_inv_sigma: (1.0 / spec.sigma).log10(),
        seed: spec.seed,
        success,
        max_error,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseGrid {
    pub log10_srf_min: f64,
    pub log10_srf_max: f64,
    pub srf_steps: usize,
    pub log10_inv_sigma_min: f64,
    pub log10_inv_sigma_max: f64,
    pub sigma_steps: usize,
    pub trials_per_cell: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            log10_srf_min: 0.3,
            log10_srf_max: 1.2,
            srf_steps: 10,
            log10_inv_sigma_min: 1.0,
            log10_inv_sigma_max: 12.0,
            sigma_steps: 12,
            trials_per_cell: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryFit {
    pub intercept: f64,
    pub coef_log10_srf: f64,
    pub coef_log10_inv_sigma: f64,
    /// Slope of the success/failure boundary d(log 1/sigma)/d(log SRF).
    pub boundary_slope: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagram {
    pub records: Vec<TrialRecord>,
    pub fit: BoundaryFit,
}

/// Runs the Monte-Carlo sweep over the (log SRF, log 1/sigma) grid. Cell
/// parameters are jittered uniformly within each cell per trial, trials are
/// independent jobs keyed by a counter-derived seed, and the success/failure
/// boundary is fit by logistic regression.
pub fn phase_diagram(
    grid: &PhaseGrid,
    mode: TrialMode,
    dimension: usize,
    n: usize,
    cutoff: f64,
    master_seed: u64,
) -> Result<PhaseDiagram> {
    if grid.srf_steps == 0 || grid.sigma_steps == 0 || grid.trials_per_cell == 0 {
        return Err(Error::InvalidArgument("empty phase grid".into()));
    }
    let srf_cell = (grid.log10_srf_max - grid.log10_srf_min) / grid.srf_steps as f64;
    let sig_cell =
        (grid.log10_inv_sigma_max - grid.log10_inv_sigma_min) / grid.sigma_steps as f64;
    let total = grid.srf_steps * grid.sigma_steps * grid.trials_per_cell;

    let records: Vec<TrialRecord> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let trial = idx % grid.trials_per_cell;
            let cell = idx / grid.trials_per_cell;
            let ci = cell % grid.srf_steps;
            let cj = cell / grid.srf_steps;
            let seed = derive_seed(master_seed, idx as u64);
            // jitter within the cell, from the trial's own stream
            let mut jrng = ChaCha12Rng::seed_from_u64(derive_seed(seed, 0x6a69_7474));
            let log_srf = grid.log10_srf_min + (ci as f64 + jrng.gen_range(0.0..1.0)) * srf_cell;
            let log_inv_sigma =
                grid.log10_inv_sigma_min + (cj as f64 + jrng.gen_range(0.0..1.0)) * sig_cell;
            let _ = trial;
            let spec = TrialSpec {
                mode,
                dimension,
                n,
                cutoff,
                d_min: PI / (cutoff * 10f64.powf(log_srf)),
                sigma: 10f64.powf(-log_inv_sigma),
                seed,
            };
            run_trial(&spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let fit = fit_boundary(&records);
    Ok(PhaseDiagram { records, fit })
}

/// Logistic regression of success on (1, log SRF, log 1/sigma) by iteratively
/// reweighted least squares with a small ridge term.
pub fn fit_boundary(records: &[TrialRecord]) -> BoundaryFit {
    let m = records.len();
    let mut beta = [0.0f64; 3];
    let ridge = 1e-6;
    let mut converged = false;
    for _ in 0..50 {
        // accumulate X^T W X and X^T (W X beta + (y - p))
        let mut a = [[0.0f64; 3]; 3];
        let mut b = [0.0f64; 3];
        for r in records {
            let x = [1.0, r.log10_srf, r.log10_inv_sigma];
            let eta: f64 = x.iter().zip(&beta).map(|(xi, bi)| xi * bi).sum();
            let p = 1.0 / (1.0 + (-eta).exp());
            let w = (p * (1.0 - p)).max(1e-6);
            let y = if r.success { 1.0 } else { 0.0 };
            let z = eta + (y - p) / w;
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] += w * x[i] * x[j];
                }
                b[i] += w * x[i] * z;
            }
        }
        for i in 0..3 {
            a[i][i] += ridge * m as f64;
        }
        let next = solve3(&a, &b);
        let delta: f64 = next
            .iter()
            .zip(&beta)
            .map(|(n, o)| (n - o).abs())
            .fold(0.0, f64::max);
        beta = next;
        if delta < 1e-8 {
            converged = true;
            break;
        }
    }
    let boundary_slope = if beta[2].abs() > 1e-12 {
        -beta[1] / beta[2]
    } else {
        f64::NAN
    };
    BoundaryFit {
        intercept: beta[0],
        coef_log10_srf: beta[1],
        coef_log10_inv_sigma: beta[2],
        boundary_slope,
        converged,
    }
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> [f64; 3] {
    // Cramer's rule on a 3x3 system
    let det = |m: &[[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 {
        return [0.0; 3];
    }
    let mut out = [0.0f64; 3];
    for col in 0..3 {
        let mut m = *a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        out[col] = det(&m) / d;
    }
    out
}

/// Writes trial records in the experiment CSV schema.
pub fn write_records_csv<W: Write>(writer: W, records: &[TrialRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "mode",
        "dim",
        "n",
        "log10_srf",
        "log10_inv_sigma",
        "seed",
        "success",
        "max_error",
        "wall_ms",
    ])?;
    for r in records {
        wtr.write_record([
            r.mode.to_string(),
            r.dim.to_string(),
            r.n.to_string(),
            format!("{:.12e}", r.log10_srf),
            format!("{:.12e}", r.log10_inv_sigma),
            r.seed.to_string(),
            (r.success as u8).to_string(),
            format!("{:.12e}", r.max_error),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Canonical serialization of the records with the wall-clock column
/// excluded; two runs with the same master seed must agree on this exactly.
pub fn canonical_records(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{},{},{},{:.17e},{:.17e},{},{},{:.17e}\n",
            r.mode,
            r.dim,
            r.n,
            r.log10_srf,
            r.log10_inv_sigma,
            r.seed,
            r.success as u8,
            r.max_error
        ));
    }
    out
}

/// An explicit near-indistinguishable pair below the resolution limit: two
/// different collinear measures whose Fourier data differ by less than sigma
/// across the whole band.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessPair {
    pub mode: &'static str,
    pub n: usize,
    pub tau: f64,
    /// Node positions and amplitudes of the n-source measure.
    pub mu_supports: Vec<f64>,
    pub mu_amplitudes: Vec<f64>,
    /// Node positions and amplitudes of the competing measure.
    pub mu_hat_supports: Vec<f64>,
    pub mu_hat_amplitudes: Vec<f64>,
    /// sup of |F(mu) - F(mu_hat)| over the dense verification grid.
    pub measured_sup: f64,
    pub valid: bool,
}

impl WitnessPair {
    pub fn mu(&self) -> DiscreteMeasure {
        build_measure(&self.mu_supports, &self.mu_amplitudes)
    }

    pub fn mu_hat(&self) -> DiscreteMeasure {
        build_measure(&self.mu_hat_supports, &self.mu_hat_amplitudes)
    }
}

fn build_measure(supports: &[f64], amplitudes: &[f64]) -> DiscreteMeasure {
    DiscreteMeasure::new(
        1,
        supports.iter().map(|&y| RealVec::from_vec(vec![y])).collect(),
        amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect(),
    )
    .expect("witness nodes are distinct with nonzero amplitudes")
}

const WITNESS_GRID: usize = 10_000;

fn binomial(n: usize, k: usize) -> f64 {
    let mut out = 1.0f64;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Builds the alternating-binomial witness pair. Number mode: 2n-1 nodes at
/// spacing tau = 0.81 e^{-3/2}/Omega (sigma/m)^{1/(2n-2)}, split n vs n-1, so
/// the competing measure has the wrong count. Support mode: 2n nodes at
/// tau = 0.49 e^{-3/2}/Omega (sigma/m)^{1/(2n-1)}, split n vs n, same count
/// but disjoint supports.
pub fn witness(
    n: usize,
    sigma: f64,
    m_min: f64,
    cutoff: f64,
    mode: TrialMode,
) -> Result<WitnessPair> {
    if n < 2 {
        return Err(Error::InvalidArgument("witness needs n >= 2".into()));
    }
    if !(sigma > 0.0 && sigma < m_min) {
        return Err(Error::InvalidArgument(
            "witness needs 0 < sigma < m_min".into(),
        ));
    }
    if cutoff <= 0.0 {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let ratio = sigma / m_min;
    let front = (-1.5f64).exp() / cutoff;
    let (tau, order, split) = match mode {
        TrialMode::Number => (
            0.81 * front * ratio.powf(1.0 / (2.0 * n as f64 - 2.0)),
            2 * n - 2,
            n,
        ),
        TrialMode::Support => (
            0.49 * front * ratio.powf(1.0 / (2.0 * n as f64 - 1.0)),
            2 * n - 1,
            n,
        ),
    };
    // gamma = sum_j m (-1)^j binom(order, j) delta_{(j - n) tau}, j = 0..order
    let nodes: Vec<f64> = (0..=order).map(|j| (j as f64 - n as f64) * tau).collect();
    let amps: Vec<f64> = (0..=order)
        .map(|j| m_min * if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(order, j))
        .collect();

    let mu_supports = nodes[..split].to_vec();
    let mu_amplitudes = amps[..split].to_vec();
    let mu_hat_supports = nodes[split..].to_vec();
    let mu_hat_amplitudes: Vec<f64> = amps[split..].iter().map(|a| -a).collect();

    // dense-grid sup of |F(gamma)| along the support axis
    let mut measured_sup = 0.0f64;
    for t in 0..WITNESS_GRID {
        let omega = -cutoff + 2.0 * cutoff * t as f64 / (WITNESS_GRID - 1) as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (y, a) in nodes.iter().zip(&amps) {
            re += a * (y * omega).cos();
            im += a * (y * omega).sin();
        }
        measured_sup = measured_sup.max((re * re + im * im).sqrt());
    }

    Ok(WitnessPair {
        mode: mode.as_str(),
        n,
        tau,
        mu_supports,
        mu_amplitudes,
        mu_hat_supports,
        mu_hat_amplitudes,
        measured_sup,
        valid: measured_sup < sigma,
    })
}
