//! Sweep protocols: success rate versus measurement count with a fresh
//! Gaussian ensemble per trial, and the minimal-measurement scan over the
//! similarity weight on nested row prefixes of one square ensemble.
//!
//! Both sweeps are driven entirely by a master seed; trials are
//! independent tasks whose sub-seeds come from the injective tag map in
//! [`crate::seed`], so reruns are bit-identical regardless of the worker
//! count.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::model::{MeasurementEnsemble, SideInformation, SparseSignal, VarianceMode};
use crate::seed;
use crate::solver::{solve_system, Objective, ObjectiveKind, SolverConfig};

/// Configuration of a success-rate sweep.
#[derive(Debug, Clone)]
pub struct PhaseConfig {
    pub m_grid: Vec<usize>,
    pub trials: usize,
    /// Relative-error threshold under which a reconstruction counts as
    /// successful.
    pub success_tol: f64,
    pub schemes: Vec<Objective>,
    pub master_seed: u64,
    pub solver: SolverConfig,
}

impl PhaseConfig {
    pub fn new(schemes: Vec<Objective>, m_grid: Vec<usize>, master_seed: u64) -> Self {
        Self {
            m_grid,
            trials: 50,
            success_tol: 1e-2,
            schemes,
            master_seed,
            solver: SolverConfig::default(),
        }
    }
}

/// The three standard schemes for a given prior.
pub fn standard_schemes(side: &SideInformation, beta: f64) -> Result<Vec<Objective>> {
    Ok(vec![
        Objective::l1(),
        Objective::l1l1(side.values().clone(), beta)?,
        Objective::l1l2(side.values().clone(), beta)?,
    ])
}

/// Default measurement grid: the full-scale protocol uses 20..=700 step 20;
/// otherwise roughly twenty equispaced values up to n.
pub fn default_m_grid(n: usize) -> Vec<usize> {
    if n >= 1000 {
        (1..=35).map(|k| k * 20).collect()
    } else {
        let step = (n / 20).max(1);
        (1..=n / step).map(|k| k * step).collect()
    }
}

/// One solved trial of a success-rate sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub scheme: ObjectiveKind,
    pub m: usize,
    pub trial: usize,
    /// Ensemble seed of this trial.
    pub seed: u64,
    /// Converged and relative error at most the success tolerance.
    pub success: bool,
    pub relative_error: f64,
    pub iterations: usize,
}

/// One replicate of the similarity-weight sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaSweepRecord {
    pub beta: f64,
    pub replicate: usize,
    /// Smallest row-prefix length that reconstructs the signal, or n when
    /// saturated.
    pub m_min: usize,
    /// True when no prefix up to the full square ensemble succeeded.
    pub saturated: bool,
}

/// Runs the success-rate sweep: for every scheme, grid value m, and trial,
/// a fresh variance-1/m ensemble is drawn and the scheme's program solved.
/// Solver failure (non-convergence or a degenerate ensemble) is recorded
/// as an unsuccessful trial, never raised.
pub fn run_phase(signal: &SparseSignal, config: &PhaseConfig) -> Result<Vec<ExperimentRecord>> {
    let n = signal.n();
    if config.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if config.m_grid.is_empty() || config.schemes.is_empty() {
        return Err(Error::invalid("m grid and scheme list must be non-empty"));
    }
    if config.success_tol <= 0.0 {
        return Err(Error::invalid("success tolerance must be positive"));
    }
    for &m in &config.m_grid {
        if m == 0 || m > n {
            return Err(Error::invalid(format!(
                "grid value m = {m} outside 1..={n}"
            )));
        }
    }
    for scheme in &config.schemes {
        scheme.check_dims(n)?;
    }

    let mut tasks = Vec::with_capacity(config.schemes.len() * config.m_grid.len() * config.trials);
    for (scheme_idx, _) in config.schemes.iter().enumerate() {
        for &m in &config.m_grid {
            for trial in 0..config.trials {
                tasks.push((scheme_idx, m, trial));
            }
        }
    }

    let records: Result<Vec<ExperimentRecord>> = tasks
        .par_iter()
        .map(|&(scheme_idx, m, trial)| {
            let objective = &config.schemes[scheme_idx];
            let ensemble_seed =
                seed::mix(config.master_seed, seed::phase_tag(scheme_idx, m, trial));
            let ensemble = MeasurementEnsemble::generate(n, m, ensemble_seed, VarianceMode::PerM)?;
            let a = ensemble.measurement_matrix(m)?;
            let y = &a * signal.values();
            match solve_system(&a, &y, Some(signal.values()), objective, &config.solver) {
                Ok(res) => Ok(ExperimentRecord {
                    scheme: objective.kind(),
                    m,
                    trial,
                    seed: ensemble_seed,
                    success: res.converged && res.relative_error <= config.success_tol,
                    relative_error: res.relative_error,
                    iterations: res.iterations,
                }),
                Err(Error::SingularEnsemble) => Ok(ExperimentRecord {
                    scheme: objective.kind(),
                    m,
                    trial,
                    seed: ensemble_seed,
                    success: false,
                    relative_error: f64::INFINITY,
                    iterations: 0,
                }),
                Err(e) => Err(e),
            }
        })
        .collect();
    // rayon's indexed collect already preserves task order; the records are
    // therefore sorted by (scheme index, m, trial)
    records
}

/// Success rates keyed by `(scheme, m)`.
pub fn aggregate(records: &[ExperimentRecord]) -> BTreeMap<(ObjectiveKind, usize), f64> {
    let mut counts: BTreeMap<(ObjectiveKind, usize), (usize, usize)> = BTreeMap::new();
    for rec in records {
        let entry = counts.entry((rec.scheme, rec.m)).or_insert((0, 0));
        entry.1 += 1;
        if rec.success {
            entry.0 += 1;
        }
    }
    counts
        .into_iter()
        .map(|(key, (ok, total))| (key, ok as f64 / total as f64))
        .collect()
}

/// Finds the smallest m such that solving with the first m rows of
/// `ensemble` reconstructs `signal` within `success_tol`, by doubling then
/// bisecting on the nested prefixes. The returned value is validated:
/// it succeeds and its predecessor fails (both solves cached).
///
/// Returns `(n, true)` when even the full square system fails.
pub fn minimal_measurements_scan(
    signal: &SparseSignal,
    ensemble: &MeasurementEnsemble,
    objective: &Objective,
    success_tol: f64,
    solver: &SolverConfig,
) -> Result<(usize, bool)> {
    let n = signal.n();
    let max_m = ensemble.rows_available().min(n);
    let mut cache: HashMap<usize, bool> = HashMap::new();

    let succeeds = |m: usize, cache: &mut HashMap<usize, bool>| -> Result<bool> {
        if let Some(&hit) = cache.get(&m) {
            return Ok(hit);
        }
        let a = ensemble.measurement_matrix(m)?;
        let y = &a * signal.values();
        let ok = match solve_system(&a, &y, Some(signal.values()), objective, solver) {
            Ok(res) => res.converged && res.relative_error <= success_tol,
            Err(Error::SingularEnsemble) => false,
            Err(e) => return Err(e),
        };
        cache.insert(m, ok);
        Ok(ok)
    };

    if !succeeds(max_m, &mut cache)? {
        return Ok((max_m, true));
    }
    let mut lo = 0usize; // largest prefix known to fail
    let mut m = 1usize;
    let mut hi = loop {
        if succeeds(m, &mut cache)? {
            break m;
        }
        lo = m;
        m = (m * 2).min(max_m);
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if succeeds(mid, &mut cache)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // guard against non-monotone solver noise near the transition
    while hi > 1 && succeeds(hi - 1, &mut cache)? {
        hi -= 1;
    }
    Ok((hi, false))
}

/// Runs the similarity-weight sweep for the l1 + l1 objective: one square
/// unit-variance ensemble per replicate, shared by every weight, scanned
/// with [`minimal_measurements_scan`].
pub fn run_beta_sweep(
    signal: &SparseSignal,
    side: &SideInformation,
    betas: &[f64],
    replicates: usize,
    success_tol: f64,
    master_seed: u64,
    solver: &SolverConfig,
) -> Result<Vec<BetaSweepRecord>> {
    let n = signal.n();
    if side.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: side.n(),
        });
    }
    if replicates == 0 || betas.is_empty() {
        return Err(Error::invalid("need at least one replicate and one beta"));
    }
    if betas.iter().any(|&b| b <= 0.0) {
        return Err(Error::invalid("betas must be positive"));
    }

    let mut tasks = Vec::with_capacity(replicates * betas.len());
    for replicate in 0..replicates {
        for &beta in betas {
            tasks.push((replicate, beta));
        }
    }
    tasks
        .par_iter()
        .map(|&(replicate, beta)| {
            let ens_seed = seed::mix(master_seed, seed::beta_replicate_tag(replicate));
            let ensemble = MeasurementEnsemble::generate(n, n, ens_seed, VarianceMode::Unit)?;
            let objective = Objective::l1l1(side.values().clone(), beta)?;
            let (m_min, saturated) =
                minimal_measurements_scan(signal, &ensemble, &objective, success_tol, solver)?;
            Ok(BetaSweepRecord {
                beta,
                replicate,
                m_min,
                saturated,
            })
        })
        .collect()
}

fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_meta<W: Write>(out: &mut W, meta: Option<&str>) -> Result<()> {
    if let Some(meta) = meta {
        writeln!(out, "# {meta}")?;
    }
    Ok(())
}

/// Writes trial records as CSV (`scheme,m,trial,seed,success,relative_error,iterations`),
/// optionally preceded by one `#` comment line of provenance metadata.
pub fn write_phase_csv<W: Write>(
    mut out: W,
    records: &[ExperimentRecord],
    meta: Option<&str>,
) -> Result<()> {
    write_meta(&mut out, meta)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "m",
        "trial",
        "seed",
        "success",
        "relative_error",
        "iterations",
    ])
    .map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.scheme.as_str().to_string(),
            r.m.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.success.to_string(),
            fmt_float(r.relative_error),
            r.iterations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes weight-sweep records as CSV (`beta,replicate,m_min,saturated`).
pub fn write_beta_csv<W: Write>(
    mut out: W,
    records: &[BetaSweepRecord],
    meta: Option<&str>,
) -> Result<()> {
    write_meta(&mut out, meta)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "replicate", "m_min", "saturated"])
        .map_err(csv_err)?;
    for r in records {
        w.write_record([
            fmt_float(r.beta),
            r.replicate.to_string(),
            r.m_min.to_string(),
            r.saturated.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes bound overlays as CSV (`scheme,width_sq_bound,minimal_m`).
pub fn write_bounds_csv<W: Write>(
    mut out: W,
    reports: &[BoundReport],
    meta: Option<&str>,
) -> Result<()> {
    write_meta(&mut out, meta)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "width_sq_bound", "minimal_m"])
        .map_err(csv_err)?;
    for r in reports {
        w.write_record([
            r.scheme.as_str().to_string(),
            fmt_float(r.width_sq_bound),
            r.minimal_m.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv write failed: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_side_info, generate_signal, MagnitudeLaw, SideInfoSpec};

    fn tiny_pair() -> (SparseSignal, SideInformation) {
        let sig = generate_signal(16, 3, MagnitudeLaw::SignOnly, 31).unwrap();
        let side = generate_side_info(&sig, &SideInfoSpec::new(1, 1, 1, 1), 32).unwrap();
        (sig, side)
    }

    #[test]
    fn phase_run_shape_and_full_rate_at_square() {
        let (sig, side) = tiny_pair();
        let mut config = PhaseConfig::new(standard_schemes(&side, 1.0).unwrap(), vec![8, 16], 41);
        config.trials = 3;
        let records = run_phase(&sig, &config).unwrap();
        assert_eq!(records.len(), 3 * 2 * 3);
        let rates = aggregate(&records);
        for kind in [ObjectiveKind::L1, ObjectiveKind::L1L1, ObjectiveKind::L1L2] {
            assert_eq!(rates[&(kind, 16)], 1.0, "square system must always succeed");
        }
    }

    #[test]
    fn phase_runs_are_bit_identical() {
        let (sig, side) = tiny_pair();
        let mut config = PhaseConfig::new(standard_schemes(&side, 1.0).unwrap(), vec![6, 12], 7);
        config.trials = 2;
        let a = run_phase(&sig, &config).unwrap();
        let b = run_phase(&sig, &config).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.relative_error.to_bits(), y.relative_error.to_bits());
            assert_eq!(x.iterations, y.iterations);
        }
    }

    #[test]
    fn phase_seed_map_is_injective_over_run() {
        let (sig, side) = tiny_pair();
        let mut config =
            PhaseConfig::new(standard_schemes(&side, 1.0).unwrap(), vec![4, 8, 12], 13);
        config.trials = 4;
        let records = run_phase(&sig, &config).unwrap();
        let mut seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), records.len());
    }

    #[test]
    fn phase_rejects_grid_beyond_n() {
        let (sig, side) = tiny_pair();
        let config = PhaseConfig::new(standard_schemes(&side, 1.0).unwrap(), vec![17], 1);
        assert!(run_phase(&sig, &config).is_err());
    }

    #[test]
    fn aggregate_rates() {
        let rec = |success, m| ExperimentRecord {
            scheme: ObjectiveKind::L1,
            m,
            trial: 0,
            seed: 0,
            success,
            relative_error: if success { 0.0 } else { 1.0 },
            iterations: 1,
        };
        let all_fail: Vec<_> = (0..4).map(|_| rec(false, 10)).collect();
        assert_eq!(aggregate(&all_fail)[&(ObjectiveKind::L1, 10)], 0.0);
        let mixed: Vec<_> = (0..50).map(|t| rec(t < 25, 10)).collect();
        assert_eq!(aggregate(&mixed)[&(ObjectiveKind::L1, 10)], 0.5);
    }

    #[test]
    fn beta_sweep_is_deterministic_and_validated() {
        let (sig, side) = tiny_pair();
        let betas = [0.1, 1.0, 10.0];
        let cfg = SolverConfig::default();
        let a = run_beta_sweep(&sig, &side, &betas, 2, 1e-2, 5, &cfg).unwrap();
        let b = run_beta_sweep(&sig, &side, &betas, 2, 1e-2, 5, &cfg).unwrap();
        assert_eq!(a.len(), 6);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!((x.m_min, x.saturated), (y.m_min, y.saturated));
        }
        for rec in &a {
            assert!(rec.m_min >= 1 && rec.m_min <= 16);
            assert!(!rec.saturated, "square prefix must eventually succeed");
        }
    }

    #[test]
    fn tiny_beta_approaches_basis_pursuit() {
        let (sig, side) = tiny_pair();
        let cfg = SolverConfig::default();
        let ens_seed = seed::mix(3, seed::beta_replicate_tag(0));
        let ens = MeasurementEnsemble::generate(16, 16, ens_seed, VarianceMode::Unit).unwrap();
        let l1l1 = Objective::l1l1(side.values().clone(), 1e-9).unwrap();
        let (m_tiny, _) = minimal_measurements_scan(&sig, &ens, &l1l1, 1e-2, &cfg).unwrap();
        let (m_bp, _) =
            minimal_measurements_scan(&sig, &ens, &Objective::l1(), 1e-2, &cfg).unwrap();
        assert_eq!(m_tiny, m_bp);
    }

    #[test]
    fn csv_round_trip_with_comment_header() {
        let (sig, side) = tiny_pair();
        let mut config = PhaseConfig::new(standard_schemes(&side, 1.0).unwrap(), vec![8], 2);
        config.trials = 2;
        let records = run_phase(&sig, &config).unwrap();

        let mut buf = Vec::new();
        write_phase_csv(&mut buf, &records, Some(r#"{"run":"test"}"#)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# {\"run\":\"test\"}\n"));
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("scheme,m,trial,seed,"));

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), records.len());
        assert_eq!(rows[0].get(0).unwrap(), records[0].scheme.as_str());
        let err: f64 = rows[0].get(5).unwrap().parse().unwrap();
        assert!(
            (err - records[0].relative_error).abs() <= 1e-8 * records[0].relative_error.max(1e-30)
        );
    }
}
