//! `sics` — one binary for the whole workflow: generate instances, profile
//! side information, evaluate measurement bounds, solve recovery programs,
//! estimate cone widths, and run the sweep experiments.
//!
//! Numeric and seed options resolve with precedence
//! flags > `--config` file > `$SICS_SEED` (master seed only) > built-in
//! defaults.
//!
//! Exit codes: 0 success, 2 invalid arguments or malformed input files,
//! 3 numerical failure (non-convergence, degenerate ensemble, inadmissible
//! width estimate).

mod grid;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use sics_core::{
    all_bounds, estimate_for_objective, experiments, profile_with_tol, solve, InstanceFile,
    MagnitudeLaw, Objective, PhaseConfig, SideInfoSpec, SolverConfig, VarianceMode,
};

#[derive(Parser)]
#[command(
    name = "sics",
    version,
    about = "Sparse recovery with side information: solvers, bounds, width estimates, experiment sweeps"
)]
struct Cli {
    /// Worker threads for sweep commands (default: all logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// JSON file with default values for seed/solver/sweep options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Optional defaults layer between flags and the built-in values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    workers: Option<usize>,
    rho: Option<f64>,
    max_iter: Option<usize>,
    eps_abs: Option<f64>,
    eps_rel: Option<f64>,
    adaptive_rho: Option<bool>,
    tol: Option<f64>,
    trials: Option<usize>,
    replicates: Option<usize>,
    samples: Option<usize>,
    beta: Option<f64>,
}

impl FileConfig {
    fn load(path: &Option<PathBuf>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MagnitudeArg {
    /// Nonzeros are +1/-1.
    Sign,
    /// Nonzeros are standard normal.
    Gaussian,
}

impl From<MagnitudeArg> for MagnitudeLaw {
    fn from(value: MagnitudeArg) -> Self {
        match value {
            MagnitudeArg::Sign => MagnitudeLaw::SignOnly,
            MagnitudeArg::Gaussian => MagnitudeLaw::GaussianMagnitude,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VarianceArg {
    Unit,
    PerM,
}

impl From<VarianceArg> for VarianceMode {
    fn from(value: VarianceArg) -> Self {
        match value {
            VarianceArg::Unit => VarianceMode::Unit,
            VarianceArg::PerM => VarianceMode::PerM,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    L1,
    L1L1,
    L1L2,
}

/// Width-estimator target; `f1`/`f2` are aliases for the two
/// side-information objectives.
#[derive(Clone, Copy, ValueEnum)]
enum WidthObjectiveArg {
    L1,
    #[value(alias = "l1l1")]
    F1,
    #[value(alias = "l1l2")]
    F2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    All,
    Cs,
    L1L1,
    L1L2,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct SolverArgs {
    /// Splitting penalty (default 1.0).
    #[arg(long)]
    rho: Option<f64>,
    /// Iteration cap (default 20000).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Absolute residual tolerance (default 1e-8).
    #[arg(long)]
    eps_abs: Option<f64>,
    /// Relative residual tolerance (default 1e-7).
    #[arg(long)]
    eps_rel: Option<f64>,
    /// Enable residual-balancing penalty adaptation (default off).
    #[arg(long)]
    adaptive_rho: bool,
}

impl SolverArgs {
    fn config(&self, file: &FileConfig) -> SolverConfig {
        let defaults = SolverConfig::default();
        SolverConfig {
            rho: self.rho.or(file.rho).unwrap_or(defaults.rho),
            max_iter: self.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
            eps_abs: self.eps_abs.or(file.eps_abs).unwrap_or(defaults.eps_abs),
            eps_rel: self.eps_rel.or(file.eps_rel).unwrap_or(defaults.eps_rel),
            adaptive_rho: self.adaptive_rho || file.adaptive_rho.unwrap_or(false),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance file.
    Gen {
        #[arg(long)]
        n: usize,
        /// Sparsity of the target signal.
        #[arg(long)]
        s: usize,
        /// Good components of the prior on the support.
        #[arg(long)]
        good: usize,
        /// Bad components of the prior on the support.
        #[arg(long)]
        bad: usize,
        /// Components where the prior equals the signal on the support.
        #[arg(long)]
        equal: usize,
        /// Nonzero prior components off the support.
        #[arg(long)]
        extra: usize,
        /// Master seed (default: config file, then $SICS_SEED, then 1).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = MagnitudeArg::Sign)]
        magnitude: MagnitudeArg,
        /// Ensemble rows to bank (default: n).
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long, value_enum, default_value_t = VarianceArg::Unit)]
        variance_mode: VarianceArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the side-information profile of an instance.
    Profile {
        #[arg(long)]
        instance: PathBuf,
        /// Equality tolerance for externally produced files.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the measurement bounds for an instance.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeArg::All)]
        scheme: SchemeArg,
        /// Similarity weight (default 1.0).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one recovery program on an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        /// Similarity weight (default 1.0).
        #[arg(long)]
        beta: Option<f64>,
        /// Rows in use (default: all banked rows).
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo statistical-dimension estimate of a tangent cone.
    Width {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        objective: WidthObjectiveArg,
        /// Similarity weight (default 1.0).
        #[arg(long)]
        beta: Option<f64>,
        /// Monte-Carlo samples (default 2000).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Success-rate sweep over the measurement count.
    Phase {
        #[arg(long)]
        instance: PathBuf,
        /// Grid `start:stop:step` or comma list (default chosen from n).
        #[arg(long)]
        m: Option<String>,
        /// Trials per (scheme, m) (default 50).
        #[arg(long)]
        trials: Option<usize>,
        /// Relative-error success threshold (default 1e-2).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma list among cs,l1l1,l1l2.
        #[arg(long, default_value = "cs,l1l1,l1l2")]
        schemes: String,
        /// Similarity weight for the side-information schemes (default 1.0).
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Records CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bound-overlay CSV (default: `bounds.csv` next to --out).
        #[arg(long)]
        bounds_out: Option<PathBuf>,
    },
    /// Minimal-measurement scan over the similarity weight.
    BetaSweep {
        #[arg(long)]
        instance: PathBuf,
        /// Grid `lo:hi:count` (log-spaced) or comma list.
        #[arg(long, default_value = "1e-2:1e2:9")]
        betas: String,
        /// Square-ensemble replicates (default 5).
        #[arg(long)]
        replicates: Option<usize>,
        /// Relative-error success threshold (default 1e-2).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_config = match FileConfig::load(&cli.config) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(workers) = cli.workers.or(file_config.workers) {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure {workers} workers");
            return ExitCode::from(2);
        }
    }
    match run(cli.command, &file_config) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<sics_core::Error>() {
        Some(sics_core::Error::SingularEnsemble) => 3,
        _ => 2,
    }
}

/// Master-seed precedence: flag, config file, $SICS_SEED, then 1.
fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64> {
    if let Some(seed) = flag.or(file.seed) {
        return Ok(seed);
    }
    match std::env::var("SICS_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .with_context(|| format!("SICS_SEED=`{text}` is not a u64")),
        Err(_) => Ok(1),
    }
}

fn load_instance(path: &Path) -> Result<InstanceFile> {
    InstanceFile::load(path).with_context(|| format!("loading instance {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    let body = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    match out {
        Some(path) => {
            std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn run(command: Command, file: &FileConfig) -> Result<ExitCode> {
    match command {
        Command::Gen {
            n,
            s,
            good,
            bad,
            equal,
            extra,
            seed,
            magnitude,
            rows,
            variance_mode,
            out,
        } => {
            let seed = resolve_seed(seed, file)?;
            let rows = rows.unwrap_or(n);
            let spec = SideInfoSpec::new(good, bad, equal, extra);
            let instance = InstanceFile::generate(
                n,
                s,
                magnitude.into(),
                &spec,
                seed,
                rows,
                variance_mode.into(),
            )?;
            eprintln!(
                "sics gen: n={n} s={s} good={good} bad={bad} equal={equal} extra={extra} seed={seed} rows={rows} variance_mode={} magnitude_law={:?}",
                VarianceMode::from(variance_mode),
                MagnitudeLaw::from(magnitude)
            );
            match &out {
                Some(path) => {
                    instance.save(path)?;
                    eprintln!("sics gen: wrote {}", path.display());
                }
                None => println!("{}", serde_json::to_string_pretty(&instance)?),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Profile { instance, eps, out } => {
            let loaded = load_instance(&instance)?;
            let prof = profile_with_tol(&loaded.signal()?, &loaded.side_info()?, eps)?;
            eprintln!("sics profile: instance={} eps={eps}", instance.display());
            emit(&out, &serde_json::to_string_pretty(&prof)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Bounds {
            instance,
            scheme,
            beta,
            format,
            out,
        } => {
            let loaded = load_instance(&instance)?;
            let beta = beta.or(file.beta).unwrap_or(1.0);
            let prof = profile_with_tol(&loaded.signal()?, &loaded.side_info()?, 0.0)?;
            let mut reports = all_bounds(&prof, beta)?;
            if let Some(keep) = match scheme {
                SchemeArg::All => None,
                SchemeArg::Cs => Some(sics_core::Scheme::Cs),
                SchemeArg::L1L1 => Some(sics_core::Scheme::L1L1),
                SchemeArg::L1L2 => Some(sics_core::Scheme::L1L2),
            } {
                reports.retain(|r| r.scheme == keep);
            }
            eprintln!("sics bounds: instance={} beta={beta}", instance.display());
            match format {
                FormatArg::Json => emit(&out, &serde_json::to_string_pretty(&reports)?)?,
                FormatArg::Csv => {
                    let meta = format!(
                        r#"{{"command":"bounds","instance":"{}","beta":{beta}}}"#,
                        instance.display()
                    );
                    let mut buf = Vec::new();
                    experiments::write_bounds_csv(&mut buf, &reports, Some(&meta))?;
                    emit(&out, &String::from_utf8(buf)?)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Solve {
            instance,
            objective,
            beta,
            m,
            solver,
            out,
        } => {
            let loaded = load_instance(&instance)?;
            let beta = beta.or(file.beta).unwrap_or(1.0);
            let m = m.unwrap_or(loaded.rows_available);
            let inst = loaded.instance(m)?;
            let w = inst.side_info().values();
            let obj = match objective {
                ObjectiveArg::L1 => Objective::l1(),
                ObjectiveArg::L1L1 => Objective::l1l1(w.clone(), beta)?,
                ObjectiveArg::L1L2 => Objective::l1l2(w.clone(), beta)?,
            };
            let config = solver.config(file);
            eprintln!(
                "sics solve: instance={} objective={} beta={beta} m={m} rho={} max_iter={} eps_abs={} eps_rel={} adaptive_rho={}",
                instance.display(),
                obj.kind().as_str(),
                config.rho,
                config.max_iter,
                config.eps_abs,
                config.eps_rel,
                config.adaptive_rho
            );
            let result = solve(&inst, &obj, &config)?;
            let converged = result.converged;
            emit(&out, &serde_json::to_string_pretty(&result)?)?;
            if converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "sics solve: did not converge within {} iterations",
                    config.max_iter
                );
                Ok(ExitCode::from(3))
            }
        }

        Command::Width {
            instance,
            objective,
            beta,
            samples,
            seed,
            out,
        } => {
            let loaded = load_instance(&instance)?;
            let beta = beta.or(file.beta).unwrap_or(1.0);
            let samples = samples.or(file.samples).unwrap_or(2000);
            let seed = resolve_seed(seed, file)?;
            let signal = loaded.signal()?;
            let side = loaded.side_info()?;
            let obj = match objective {
                WidthObjectiveArg::L1 => Objective::l1(),
                WidthObjectiveArg::F1 => Objective::l1l1(side.values().clone(), beta)?,
                WidthObjectiveArg::F2 => Objective::l1l2(side.values().clone(), beta)?,
            };
            eprintln!(
                "sics width: instance={} objective={} beta={beta} samples={samples} seed={seed}",
                instance.display(),
                obj.kind().as_str()
            );
            match estimate_for_objective(&obj, &signal, samples, seed) {
                Ok(estimate) => {
                    emit(&out, &serde_json::to_string_pretty(&estimate)?)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    Ok(ExitCode::from(3))
                }
            }
        }

        Command::Phase {
            instance,
            m,
            trials,
            tol,
            seed,
            schemes,
            beta,
            solver,
            out,
            bounds_out,
        } => {
            let loaded = load_instance(&instance)?;
            let signal = loaded.signal()?;
            let side = loaded.side_info()?;
            let seed = resolve_seed(seed, file)?;
            let trials = trials.or(file.trials).unwrap_or(50);
            let tol = tol.or(file.tol).unwrap_or(1e-2);
            let beta = beta.or(file.beta).unwrap_or(1.0);
            let grid = match &m {
                Some(text) => grid::parse_m_grid(text)?,
                None => experiments::default_m_grid(loaded.n),
            };
            let mut objectives = Vec::new();
            for token in schemes.split(',') {
                objectives.push(match token.trim() {
                    "cs" | "l1" => Objective::l1(),
                    "l1l1" => Objective::l1l1(side.values().clone(), beta)?,
                    "l1l2" => Objective::l1l2(side.values().clone(), beta)?,
                    other => bail!("unknown scheme `{other}` (expected cs, l1l1, l1l2)"),
                });
            }
            let mut config = PhaseConfig::new(objectives, grid, seed);
            config.trials = trials;
            config.success_tol = tol;
            config.solver = solver.config(file);

            let meta = format!(
                r#"{{"command":"phase","instance":"{}","m_grid":"{}","trials":{trials},"tol":{tol},"seed":{seed},"schemes":"{schemes}","beta":{beta},"rho":{},"max_iter":{},"eps_abs":{},"eps_rel":{}}}"#,
                instance.display(),
                m.as_deref().unwrap_or("default"),
                config.solver.rho,
                config.solver.max_iter,
                config.solver.eps_abs,
                config.solver.eps_rel
            );
            eprintln!("sics phase: {meta}");
            let records = experiments::run_phase(&signal, &config)?;

            let mut buf = Vec::new();
            experiments::write_phase_csv(&mut buf, &records, Some(&meta))?;
            emit(&out, &String::from_utf8(buf)?)?;

            // bound overlay next to the records
            let overlay_path =
                bounds_out.or_else(|| out.as_ref().map(|p| p.with_file_name("bounds.csv")));
            match overlay_path {
                Some(path) => {
                    let prof = profile_with_tol(&signal, &side, 0.0)?;
                    let reports = all_bounds(&prof, beta)?;
                    let mut buf = Vec::new();
                    experiments::write_bounds_csv(&mut buf, &reports, Some(&meta))?;
                    std::fs::write(&path, buf)
                        .with_context(|| format!("writing {}", path.display()))?;
                    eprintln!("sics phase: wrote bound overlay {}", path.display());
                }
                None => eprintln!("sics phase: no --out/--bounds-out, skipping bound overlay"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::BetaSweep {
            instance,
            betas,
            replicates,
            tol,
            seed,
            solver,
            out,
        } => {
            let loaded = load_instance(&instance)?;
            let signal = loaded.signal()?;
            let side = loaded.side_info()?;
            let seed = resolve_seed(seed, file)?;
            let replicates = replicates.or(file.replicates).unwrap_or(5);
            let tol = tol.or(file.tol).unwrap_or(1e-2);
            let beta_grid = grid::parse_betas(&betas)?;
            let config = solver.config(file);
            let meta = format!(
                r#"{{"command":"beta-sweep","instance":"{}","betas":"{betas}","replicates":{replicates},"tol":{tol},"seed":{seed},"rho":{},"max_iter":{},"eps_abs":{},"eps_rel":{}}}"#,
                instance.display(),
                config.rho,
                config.max_iter,
                config.eps_abs,
                config.eps_rel
            );
            eprintln!("sics beta-sweep: {meta}");
            let records = experiments::run_beta_sweep(
                &signal, &side, &beta_grid, replicates, tol, seed, &config,
            )?;
            let mut buf = Vec::new();
            experiments::write_beta_csv(&mut buf, &records, Some(&meta))?;
            emit(&out, &String::from_utf8(buf)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
