//! Domain types: sparse signals, side information, Gaussian measurement
//! ensembles, and assembled problem instances, plus their deterministic
//! generators and the JSON instance-file format.
//!
//! All generators are pure functions of their arguments and a `u64` seed;
//! regenerating with the same inputs reproduces every value bit for bit.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// How nonzero magnitudes of a generated signal are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeLaw {
    /// Nonzeros are +1 or -1 with equal probability.
    #[default]
    SignOnly,
    /// Nonzeros are standard normal draws.
    GaussianMagnitude,
}

/// An s-sparse target vector together with its derived support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    values: DVector<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    /// Wraps a dense vector, deriving the support as the set of exactly
    /// nonzero entries. Errors on an empty or non-finite vector.
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("signal dimension must be at least 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("signal entries must be finite"));
        }
        let support = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { values, support })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    /// Ambient dimension n.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Number of nonzero entries s.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// Sorted indices of the nonzero entries.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }
}

/// The prior vector w, paired with a signal of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SideInformation {
    values: DVector<f64>,
}

impl SideInformation {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("side-information entries must be finite"));
        }
        Ok(Self { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }
}

/// Requested composition of the side information relative to a signal.
///
/// The on-support counts must satisfy
/// `n_good + n_bad + n_equal_on_support = s`, and
/// `n_extra_off_support` indices outside the support receive a nonzero
/// prior entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideInfoSpec {
    pub n_good: usize,
    pub n_bad: usize,
    pub n_equal_on_support: usize,
    pub n_extra_off_support: usize,
}

impl SideInfoSpec {
    pub fn new(
        n_good: usize,
        n_bad: usize,
        n_equal_on_support: usize,
        n_extra_off_support: usize,
    ) -> Self {
        Self {
            n_good,
            n_bad,
            n_equal_on_support,
            n_extra_off_support,
        }
    }

    /// A spec that makes w identical to the signal.
    pub fn identical(s: usize) -> Self {
        Self::new(0, 0, s, 0)
    }
}

/// Variance convention of the stored ensemble entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Entries are stored with variance `1/rows_available`; taking a prefix
    /// uses them unchanged. Intended for ensembles generated with exactly
    /// the rows that will be used.
    PerM,
    /// Entries are stored with unit variance; an m-row prefix is scaled by
    /// `1/sqrt(m)` at use, so every nested prefix has variance-`1/m` rows.
    Unit,
}

impl fmt::Display for VarianceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarianceMode::PerM => write!(f, "per_m"),
            VarianceMode::Unit => write!(f, "unit"),
        }
    }
}

/// A bank of Gaussian measurement rows regenerable from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    seed: u64,
    n: usize,
    rows_available: usize,
    variance_mode: VarianceMode,
    entries: DMatrix<f64>,
}

impl MeasurementEnsemble {
    /// Draws a `rows_available x n` matrix of i.i.d. Gaussians from `seed`.
    ///
    /// Entries are drawn in row-major order, so the first m rows always
    /// consume the same stream prefix. In `PerM` mode the stored entries are
    /// scaled by `1/sqrt(rows_available)` at generation.
    pub fn generate(
        n: usize,
        rows_available: usize,
        seed: u64,
        variance_mode: VarianceMode,
    ) -> Result<Self> {
        if n == 0 || rows_available == 0 {
            return Err(Error::invalid("ensemble dimensions must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = match variance_mode {
            VarianceMode::PerM => 1.0 / (rows_available as f64).sqrt(),
            VarianceMode::Unit => 1.0,
        };
        let mut raw = Vec::with_capacity(rows_available * n);
        for _ in 0..rows_available * n {
            let z: f64 = rng.sample(StandardNormal);
            raw.push(scale * z);
        }
        let entries = DMatrix::from_row_slice(rows_available, n, &raw);
        Ok(Self {
            seed,
            n,
            rows_available,
            variance_mode,
            entries,
        })
    }

    /// Wraps explicit entries (used by tests to inject e.g. an identity
    /// ensemble). The entries are interpreted exactly as stored ones.
    pub fn from_entries(
        entries: DMatrix<f64>,
        seed: u64,
        variance_mode: VarianceMode,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("ensemble entries must be non-empty"));
        }
        Ok(Self {
            seed,
            n: entries.ncols(),
            rows_available: entries.nrows(),
            variance_mode,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows_available(&self) -> usize {
        self.rows_available
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn variance_mode(&self) -> VarianceMode {
        self.variance_mode
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The m-row measurement matrix: the stored prefix, scaled per mode.
    pub fn measurement_matrix(&self, m: usize) -> Result<DMatrix<f64>> {
        if m == 0 || m > self.rows_available {
            return Err(Error::invalid(format!(
                "m = {m} must satisfy 1 <= m <= rows_available = {}",
                self.rows_available
            )));
        }
        let prefix = self.entries.rows(0, m).into_owned();
        Ok(match self.variance_mode {
            VarianceMode::PerM => prefix,
            VarianceMode::Unit => prefix * (1.0 / (m as f64).sqrt()),
        })
    }
}

/// A fully assembled recovery problem: the triple (x*, w, A) and y = A x*.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    signal: SparseSignal,
    side_info: SideInformation,
    ensemble: MeasurementEnsemble,
    m: usize,
    measurements: DVector<f64>,
}

impl ProblemInstance {
    /// Combines the parts and computes `measurements = A_prefix x*`.
    pub fn assemble(
        signal: SparseSignal,
        side_info: SideInformation,
        ensemble: MeasurementEnsemble,
        m: usize,
    ) -> Result<Self> {
        if side_info.n() != signal.n() {
            return Err(Error::LengthMismatch {
                expected: signal.n(),
                got: side_info.n(),
            });
        }
        if ensemble.n() != signal.n() {
            return Err(Error::LengthMismatch {
                expected: signal.n(),
                got: ensemble.n(),
            });
        }
        let a = ensemble.measurement_matrix(m)?;
        let measurements = &a * signal.values();
        Ok(Self {
            signal,
            side_info,
            ensemble,
            m,
            measurements,
        })
    }

    pub fn signal(&self) -> &SparseSignal {
        &self.signal
    }

    pub fn side_info(&self) -> &SideInformation {
        &self.side_info
    }

    pub fn ensemble(&self) -> &MeasurementEnsemble {
        &self.ensemble
    }

    /// Rows in use.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.signal.n()
    }

    pub fn measurements(&self) -> &DVector<f64> {
        &self.measurements
    }

    /// The scaled m x n matrix that produced `measurements`.
    pub fn measurement_matrix(&self) -> DMatrix<f64> {
        self.ensemble
            .measurement_matrix(self.m)
            .expect("instance invariant: m <= rows_available")
    }
}

/// Generates an s-sparse signal with support chosen uniformly at random.
pub fn generate_signal(n: usize, s: usize, law: MagnitudeLaw, seed: u64) -> Result<SparseSignal> {
    if s > n {
        return Err(Error::invalid(format!(
            "sparsity s = {s} exceeds dimension n = {n}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("signal dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support = rand::seq::index::sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    let mut values = DVector::zeros(n);
    for &i in &support {
        values[i] = match law {
            MagnitudeLaw::SignOnly => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            MagnitudeLaw::GaussianMagnitude => loop {
                let z: f64 = rng.sample(StandardNormal);
                if z != 0.0 {
                    break z;
                }
            },
        };
    }
    SparseSignal::new(values)
}

/// Generates side information realizing exactly the counts in `spec`.
///
/// Construction: the support of the signal is partitioned at random into
/// good / bad / equal subsets of the requested sizes. Equal entries copy
/// the signal value bit for bit. Good entries move away from zero by
/// `delta ~ U(0.1, 1.0)`; bad entries move toward zero without crossing it;
/// extra entries off the support get `±delta`, `delta ~ U(0.1, 1.0)`.
pub fn generate_side_info(
    signal: &SparseSignal,
    spec: &SideInfoSpec,
    seed: u64,
) -> Result<SideInformation> {
    let n = signal.n();
    let s = signal.sparsity();
    let on_support = spec.n_good + spec.n_bad + spec.n_equal_on_support;
    if on_support != s {
        return Err(Error::invalid(format!(
            "on-support counts good + bad + equal = {on_support} must equal s = {s}"
        )));
    }
    if spec.n_extra_off_support > n - s {
        return Err(Error::invalid(format!(
            "n_extra_off_support = {} exceeds the {} off-support indices",
            spec.n_extra_off_support,
            n - s
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = signal.support().to_vec();
    order.shuffle(&mut rng);
    let mut good: Vec<usize> = order[..spec.n_good].to_vec();
    let mut bad: Vec<usize> = order[spec.n_good..spec.n_good + spec.n_bad].to_vec();
    let mut equal: Vec<usize> = order[spec.n_good + spec.n_bad..].to_vec();
    good.sort_unstable();
    bad.sort_unstable();
    equal.sort_unstable();

    let off_support: Vec<usize> = {
        let mut mark = vec![false; n];
        for &i in signal.support() {
            mark[i] = true;
        }
        (0..n).filter(|&i| !mark[i]).collect()
    };
    let mut extra: Vec<usize> =
        rand::seq::index::sample(&mut rng, off_support.len(), spec.n_extra_off_support)
            .into_iter()
            .map(|k| off_support[k])
            .collect();
    extra.sort_unstable();

    let x = signal.values();
    let mut w = DVector::zeros(n);
    for &i in &equal {
        w[i] = x[i];
    }
    for &i in &good {
        let delta = rng.random_range(0.1..1.0);
        w[i] = x[i] + x[i].signum() * delta;
    }
    for &i in &bad {
        // stay strictly between 0 and x_i so the sign is preserved
        let hi = 0.9 * x[i].abs();
        let lo = f64::min(0.1, 0.5 * hi);
        let delta = rng.random_range(lo..hi);
        w[i] = x[i] - x[i].signum() * delta;
    }
    for &i in &extra {
        let delta = rng.random_range(0.1..1.0);
        w[i] = if rng.random_bool(0.5) { delta } else { -delta };
    }
    SideInformation::new(w)
}

/// Generates the ensemble from `seed_ensemble` and assembles the instance.
pub fn build_instance(
    signal: SparseSignal,
    side_info: SideInformation,
    seed_ensemble: u64,
    rows_available: usize,
    m: usize,
    variance_mode: VarianceMode,
) -> Result<ProblemInstance> {
    if m > rows_available {
        return Err(Error::invalid(format!(
            "m = {m} must not exceed rows_available = {rows_available}"
        )));
    }
    let ensemble =
        MeasurementEnsemble::generate(signal.n(), rows_available, seed_ensemble, variance_mode)?;
    ProblemInstance::assemble(signal, side_info, ensemble, m)
}

/// On-disk instance description. Vectors are stored verbatim; the ensemble
/// is stored by `(seed_ensemble, M, n, variance_mode)` and regenerated on
/// load, which keeps files compact and bit-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub n: usize,
    pub s: usize,
    pub seed_signal: u64,
    pub seed_side: u64,
    pub seed_ensemble: u64,
    #[serde(rename = "M")]
    pub rows_available: usize,
    pub variance_mode: VarianceMode,
    #[serde(default)]
    pub magnitude_law: MagnitudeLaw,
    pub x_star: Vec<f64>,
    pub w: Vec<f64>,
}

impl InstanceFile {
    /// Generates signal and side information from a master seed and packs
    /// them into a file record. Sub-seeds are derived with the fixed tags
    /// in [`crate::seed`].
    pub fn generate(
        n: usize,
        s: usize,
        law: MagnitudeLaw,
        spec: &SideInfoSpec,
        master_seed: u64,
        rows_available: usize,
        variance_mode: VarianceMode,
    ) -> Result<Self> {
        let seed_signal = seed::mix(master_seed, seed::TAG_SIGNAL);
        let seed_side = seed::mix(master_seed, seed::TAG_SIDE_INFO);
        let seed_ensemble = seed::mix(master_seed, seed::TAG_ENSEMBLE);
        let signal = generate_signal(n, s, law, seed_signal)?;
        let side = generate_side_info(&signal, spec, seed_side)?;
        if rows_available == 0 {
            return Err(Error::invalid("rows_available must be positive"));
        }
        Ok(Self {
            n,
            s,
            seed_signal,
            seed_side,
            seed_ensemble,
            rows_available,
            variance_mode,
            magnitude_law: law,
            x_star: signal.as_slice().to_vec(),
            w: side.as_slice().to_vec(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::MalformedInstance(
                "field `n` must be positive".into(),
            ));
        }
        if self.x_star.len() != self.n {
            return Err(Error::MalformedInstance(format!(
                "field `x_star` has length {} but `n` = {}",
                self.x_star.len(),
                self.n
            )));
        }
        if self.w.len() != self.n {
            return Err(Error::MalformedInstance(format!(
                "field `w` has length {} but `n` = {}",
                self.w.len(),
                self.n
            )));
        }
        if self.x_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedInstance(
                "field `x_star` contains a non-finite value".into(),
            ));
        }
        if self.w.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedInstance(
                "field `w` contains a non-finite value".into(),
            ));
        }
        let actual_s = self.x_star.iter().filter(|&&v| v != 0.0).count();
        if actual_s != self.s {
            return Err(Error::MalformedInstance(format!(
                "field `s` = {} but `x_star` has {} nonzero entries",
                self.s, actual_s
            )));
        }
        if self.rows_available == 0 {
            return Err(Error::MalformedInstance(
                "field `M` must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn signal(&self) -> Result<SparseSignal> {
        SparseSignal::from_slice(&self.x_star)
    }

    pub fn side_info(&self) -> Result<SideInformation> {
        SideInformation::from_slice(&self.w)
    }

    /// Regenerates the ensemble from the stored seed and shape.
    pub fn ensemble(&self) -> Result<MeasurementEnsemble> {
        MeasurementEnsemble::generate(
            self.n,
            self.rows_available,
            self.seed_ensemble,
            self.variance_mode,
        )
    }

    /// Assembles the instance with `m` rows in use.
    pub fn instance(&self, m: usize) -> Result<ProblemInstance> {
        ProblemInstance::assemble(self.signal()?, self.side_info()?, self.ensemble()?, m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::MalformedInstance(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: InstanceFile =
            serde_json::from_str(&text).map_err(|e| Error::MalformedInstance(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }
}
