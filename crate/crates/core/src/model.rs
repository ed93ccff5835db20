//! Forward model and measurement access: discrete measures, the noisy
//! band-limited Fourier oracle, subspace restriction, admissibility checking
//! and the resolution-limit bound formulas.

use std::collections::HashMap;
use std::f64::consts::{E, PI};
use std::io::{Read, Write};
use std::sync::Mutex;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RealVec;

pub type C64 = Complex<f64>;

/// Slack for floating-point drift when checking ||omega|| <= Omega.
const BAND_SLACK: f64 = 1e-9;

/// A weighted sum of Dirac deltas: locations y_j in R^k with complex
/// amplitudes a_j, all nonzero.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    dimension: usize,
    supports: Vec<RealVec>,
    amplitudes: Vec<C64>,
}

impl DiscreteMeasure {
    pub fn new(dimension: usize, supports: Vec<RealVec>, amplitudes: Vec<C64>) -> Result<Self> {
        if supports.len() != amplitudes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} supports but {} amplitudes",
                supports.len(),
                amplitudes.len()
            )));
        }
        for y in &supports {
            if y.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: y.len(),
                });
            }
        }
        if amplitudes.iter().any(|a| a.norm() == 0.0) {
            return Err(Error::InvalidArgument(
                "all amplitudes must be nonzero".into(),
            ));
        }
        Ok(Self {
            dimension,
            supports,
            amplitudes,
        })
    }

    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            supports: Vec::new(),
            amplitudes: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn supports(&self) -> &[RealVec] {
        &self.supports
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Minimum amplitude modulus. Always computed, never trusted from config.
    pub fn m_min(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum pairwise support separation.
    pub fn d_min(&self) -> f64 {
        let mut d = f64::INFINITY;
        for p in 0..self.supports.len() {
            for j in (p + 1)..self.supports.len() {
                d = d.min((&self.supports[p] - &self.supports[j]).norm());
            }
        }
        d
    }

    /// True when every support lies in the closed ball of radius
    /// (n-1) pi / (2 Omega).
    pub fn satisfies_support_ball(&self, cutoff: f64) -> bool {
        let radius = (self.len().saturating_sub(1)) as f64 * PI / (2.0 * cutoff);
        self.supports.iter().all(|y| y.norm() <= radius + BAND_SLACK)
    }

    /// F mu (omega) = sum_j a_j exp(i y_j . omega).
    pub fn fourier(&self, omega: &RealVec) -> Result<C64> {
        if omega.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: omega.len(),
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (y, a) in self.supports.iter().zip(&self.amplitudes) {
            let phase = y.dot(omega);
            acc += a * C64::new(phase.cos(), phase.sin());
        }
        Ok(acc)
    }

    /// The measure with supports projected onto the subspace spanned by
    /// `basis`, expressed in basis coordinates.
    pub fn project(&self, basis: &[RealVec]) -> Result<DiscreteMeasure> {
        let supports = self
            .supports
            .iter()
            .map(|y| RealVec::from_iterator(basis.len(), basis.iter().map(|b| b.dot(y))))
            .collect();
        DiscreteMeasure::new(basis.len(), supports, self.amplitudes.clone())
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let file: MeasureFile = serde_json::from_reader(reader)?;
        file.try_into()
    }

    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<()> {
        let file = MeasureFile::from(self);
        serde_json::to_writer_pretty(writer, &file)?;
        Ok(())
    }
}

/// On-disk measure schema:
/// `{ "dimension": k, "sources": [ {"y": [...], "re": f, "im": f} ] }`.
#[derive(Debug, Serialize, Deserialize)]
struct MeasureFile {
    dimension: usize,
    sources: Vec<SourceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SourceEntry {
    y: Vec<f64>,
    re: f64,
    im: f64,
}

impl TryFrom<MeasureFile> for DiscreteMeasure {
    type Error = Error;

    fn try_from(file: MeasureFile) -> Result<Self> {
        let mut supports = Vec::with_capacity(file.sources.len());
        let mut amplitudes = Vec::with_capacity(file.sources.len());
        for s in file.sources {
            supports.push(RealVec::from_vec(s.y));
            amplitudes.push(C64::new(s.re, s.im));
        }
        DiscreteMeasure::new(file.dimension, supports, amplitudes)
    }
}

impl From<&DiscreteMeasure> for MeasureFile {
    fn from(m: &DiscreteMeasure) -> Self {
        MeasureFile {
            dimension: m.dimension,
            sources: m
                .supports
                .iter()
                .zip(&m.amplitudes)
                .map(|(y, a)| SourceEntry {
                    y: y.iter().copied().collect(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }
}

/// Bit-exact key for a frequency point, so that repeated queries at the same
/// omega are recognized as identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OmegaKey(Vec<u64>);

impl OmegaKey {
    pub fn of(omega: &RealVec) -> Self {
        OmegaKey(omega.iter().map(|x| x.to_bits()).collect())
    }
}

/// A source of band-limited Fourier measurements Y(omega), ||omega|| <= Omega.
pub trait Measurement: Sync {
    fn dimension(&self) -> usize;
    fn cutoff(&self) -> f64;
    fn query(&self, omega: &RealVec) -> Result<C64>;
}

/// Deterministic noisy oracle: Y(omega) = F mu (omega) + W(omega) with
/// |W(omega)| < sigma.
///
/// The noise field is realized lazily per bit-exact omega and derived
/// statelessly from (seed, omega bits), so identical queries return identical
/// values regardless of query order or thread schedule. A memo map records
/// every frequency touched.
pub struct MeasurementOracle {
    measure: DiscreteMeasure,
    cutoff: f64,
    noise_level: f64,
    seed: u64,
    cache: Mutex<HashMap<OmegaKey, C64>>,
}

impl MeasurementOracle {
    pub fn new(measure: DiscreteMeasure, cutoff: f64, noise_level: f64, seed: u64) -> Result<Self> {
        if cutoff <= 0.0 {
            return Err(Error::InvalidArgument("cutoff must be positive".into()));
        }
        if noise_level < 0.0 {
            return Err(Error::InvalidArgument(
                "noise level must be nonnegative".into(),
            ));
        }
        Ok(Self {
            measure,
            cutoff,
            noise_level,
            seed,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Every frequency queried so far, in unspecified order.
    pub fn sampled_points(&self) -> Vec<RealVec> {
        let cache = self.cache.lock().unwrap();
        cache
            .keys()
            .map(|k| RealVec::from_iterator(k.0.len(), k.0.iter().map(|&b| f64::from_bits(b))))
            .collect()
    }

    fn noise_at(&self, key: &OmegaKey) -> C64 {
        if self.noise_level == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for &bits in &key.0 {
            h ^= bits;
            h = splitmix64(h);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(h);
        // open interval keeps |W| strictly below sigma
        let half = self.noise_level / std::f64::consts::SQRT_2 * (1.0 - f64::EPSILON);
        let re = rng.gen_range(-1.0..1.0) * half;
        let im = rng.gen_range(-1.0..1.0) * half;
        C64::new(re, im)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Measurement for MeasurementOracle {
    fn dimension(&self) -> usize {
        self.measure.dimension()
    }

    fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn query(&self, omega: &RealVec) -> Result<C64> {
        let norm = omega.norm();
        if norm > self.cutoff * (1.0 + BAND_SLACK) {
            return Err(Error::OutOfBand {
                norm,
                cutoff: self.cutoff,
            });
        }
        let key = OmegaKey::of(omega);
        {
            let cache = self.cache.lock().unwrap();
            if let Some(&v) = cache.get(&key) {
                return Ok(v);
            }
        }
        let value = self.measure.fourier(omega)? + self.noise_at(&key);
        let mut cache = self.cache.lock().unwrap();
        Ok(*cache.entry(key).or_insert(value))
    }
}

/// Replays recorded samples; queries at unrecorded omega are rejected.
pub struct RecordedSamples {
    dimension: usize,
    cutoff: f64,
    samples: HashMap<OmegaKey, C64>,
}

impl RecordedSamples {
    pub fn new(dimension: usize, cutoff: f64, points: Vec<(RealVec, C64)>) -> Result<Self> {
        let mut samples = HashMap::with_capacity(points.len());
        for (omega, value) in points {
            if omega.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: omega.len(),
                });
            }
            samples.insert(OmegaKey::of(&omega), value);
        }
        Ok(Self {
            dimension,
            cutoff,
            samples,
        })
    }

    /// Reads the CSV schema `omega_1,...,omega_k,re,im`.
    pub fn from_csv_reader<R: Read>(reader: R, cutoff: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 3 {
            return Err(Error::InvalidArgument(
                "sample CSV needs omega_1..omega_k,re,im columns".into(),
            ));
        }
        let dimension = headers.len() - 2;
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| Error::InvalidArgument("short CSV row".into()))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::InvalidArgument(format!("bad CSV number: {e}")))
            };
            let omega = RealVec::from_iterator(
                dimension,
                (0..dimension).map(|i| parse(i).unwrap_or(f64::NAN)),
            );
            if omega.iter().any(|x| x.is_nan()) {
                return Err(Error::InvalidArgument("bad CSV number".into()));
            }
            let re = parse(dimension)?;
            let im = parse(dimension + 1)?;
            points.push((omega, C64::new(re, im)));
        }
        Self::new(dimension, cutoff, points)
    }

    /// Writes the same CSV schema, rows sorted lexicographically by omega.
    pub fn write_csv<W: Write>(
        writer: W,
        dimension: usize,
        points: &[(RealVec, C64)],
    ) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=dimension).map(|i| format!("omega_{i}")).collect();
        header.push("re".into());
        header.push("im".into());
        wtr.write_record(&header)?;
        let mut rows: Vec<&(RealVec, C64)> = points.iter().collect();
        rows.sort_by(|a, b| {
            a.0.iter()
                .zip(b.0.iter())
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for (omega, value) in rows {
            let mut row: Vec<String> = omega.iter().map(|x| format!("{x:.17e}")).collect();
            row.push(format!("{:.17e}", value.re));
            row.push(format!("{:.17e}", value.im));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl Measurement for RecordedSamples {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn cutoff(&self) -> f64 {
        self.cutoff
    }

    fn query(&self, omega: &RealVec) -> Result<C64> {
        self.samples
            .get(&OmegaKey::of(omega))
            .copied()
            .ok_or(Error::UnrecordedSample)
    }
}

/// View of a measurement restricted to the subspace spanned by an orthonormal
/// basis: a query at coordinates c is forwarded to omega = sum_i c_i b_i.
pub struct RestrictedOracle<'a> {
    base: &'a dyn Measurement,
    basis: Vec<RealVec>,
}

impl<'a> RestrictedOracle<'a> {
    pub fn new(base: &'a dyn Measurement, basis: Vec<RealVec>) -> Result<Self> {
        for (i, b) in basis.iter().enumerate() {
            if b.len() != base.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: base.dimension(),
                    got: b.len(),
                });
            }
            for (j, other) in basis.iter().enumerate() {
                let dot = b.dot(other);
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > 1e-10 {
                    return Err(Error::InvalidArgument(
                        "basis is not orthonormal within 1e-10".into(),
                    ));
                }
            }
        }
        Ok(Self { base, basis })
    }

    pub fn basis(&self) -> &[RealVec] {
        &self.basis
    }

    /// Maps subspace coordinates to the ambient frequency point.
    pub fn embed(&self, coords: &RealVec) -> RealVec {
        let mut omega = RealVec::zeros(self.base.dimension());
        for (c, b) in coords.iter().zip(&self.basis) {
            omega += b * *c;
        }
        omega
    }
}

impl Measurement for RestrictedOracle<'_> {
    fn dimension(&self) -> usize {
        self.basis.len()
    }

    fn cutoff(&self) -> f64 {
        self.base.cutoff()
    }

    fn query(&self, coords: &RealVec) -> Result<C64> {
        if coords.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                got: coords.len(),
            });
        }
        self.base.query(&self.embed(coords))
    }
}

/// Finite-grid surrogate for sigma-admissibility: true iff the candidate's
/// Fourier transform stays within sigma of the data on every grid point.
/// The strict inequality turns non-strict at sigma = 0, where it is vacuous.
pub fn is_admissible(
    candidate: &DiscreteMeasure,
    data: &dyn Measurement,
    omegas: &[RealVec],
    sigma: f64,
) -> Result<bool> {
    if omegas.is_empty() {
        return Err(Error::InvalidArgument(
            "admissibility needs a non-empty grid".into(),
        ));
    }
    for omega in omegas {
        let residual = (candidate.fourier(omega)? - data.query(omega)?).norm();
        let ok = if sigma == 0.0 {
            residual <= 0.0
        } else {
            residual < sigma
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Partial harmonic sum: xi(k) = sum_{j=1}^{k} 1/j, xi(0) = 0.
pub fn xi(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// Super-resolution factor pi / (Omega d_min).
pub fn srf(d_min: f64, cutoff: f64) -> Result<f64> {
    if d_min <= 0.0 || cutoff <= 0.0 {
        return Err(Error::InvalidArgument(
            "srf needs positive d_min and cutoff".into(),
        ));
    }
    Ok(PI / (cutoff * d_min))
}

/// Signal-to-noise ratio m_min / sigma.
pub fn snr(m_min: f64, sigma: f64) -> Result<f64> {
    if m_min <= 0.0 || sigma <= 0.0 {
        return Err(Error::InvalidArgument(
            "snr needs positive m_min and sigma".into(),
        ));
    }
    Ok(m_min / sigma)
}

/// The four resolution-limit bound lengths plus the support error constant.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub dimension: usize,
    pub cutoff: f64,
    pub sigma: f64,
    pub m_min: f64,
    pub number_upper: f64,
    pub number_lower: f64,
    pub support_upper: f64,
    pub support_lower: f64,
    pub support_error_constant: f64,
}

/// Evaluates the computational resolution limit bounds for `n` sources in
/// dimension `k` (the number-detection bound uses `k` as the dimension of the
/// smallest subspace containing the sources).
pub fn bounds(n: usize, k: usize, cutoff: f64, sigma: f64, m_min: f64) -> Result<BoundReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("bounds need n >= 2".into()));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("bounds need dimension >= 1".into()));
    }
    if !(sigma > 0.0 && sigma < m_min) {
        return Err(Error::InvalidArgument(
            "bounds need 0 < sigma < m_min".into(),
        ));
    }
    if cutoff <= 0.0 {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let nf = n as f64;
    let ratio = sigma / m_min;
    let num_exp = ratio.powf(1.0 / (2.0 * nf - 2.0));
    let supp_exp = ratio.powf(1.0 / (2.0 * nf - 1.0));

    let number_upper = 4.4 * PI * E
        * (PI / 2.0).powi(k as i32 - 1)
        * (nf * (nf - 1.0) / PI).powf(xi(k - 1))
        / cutoff
        * num_exp;
    let number_lower = 0.81 * (-1.5f64).exp() / cutoff * num_exp;

    let supp_base = 4.0f64.powi(k as i32 - 1) * ((nf + 2.0) * (nf - 1.0) / 2.0).powf(xi(k - 1));
    let support_upper = 5.88 * PI * E * supp_base / cutoff * supp_exp;
    let support_lower = 0.49 * (-1.5f64).exp() / cutoff * supp_exp;

    let support_error_constant =
        supp_base.powi(2 * n as i32 - 1) * nf * 2.0f64.powi(4 * n as i32 - 2)
            * E.powi(2 * n as i32)
            * PI.powf(-0.5);

    Ok(BoundReport {
        n,
        dimension: k,
        cutoff,
        sigma,
        m_min,
        number_upper,
        number_lower,
        support_upper,
        support_lower,
        support_error_constant,
    })
}
