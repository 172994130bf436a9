//! Experiment commands for first p-Laplacian eigenvalues under conformal
//! changes of metric.
//!
//! Every command reads one JSON config and writes `results.json`,
//! `rows.csv` and, where it makes sense, `chart.svg` and the mesh into the
//! output directory. Floats in CSV are printed with 17 significant digits
//! and nothing time-dependent is written, so reruns are byte-identical.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub mod commands;
pub mod config;
pub mod error;
pub mod factors;
pub mod output;

use config::ExperimentConfig;
use error::CliError;
use output::Artifacts;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
}

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 validation or I/O error, 2 numerical non-convergence,
3 an asserted inequality or trend failed.

rows.csv columns:
  eigen              problem,vertices,volume,lambda,gradient_residual,constraint_defect,iterations,converged
  sweep-eps          eps,lambda,volume_before,lambda_scaled,converged
  verify-bound       case,factor,bound,lambda,slack,ratio,converged,holds
  reflect            case,factor,lambda_closed,lambda_neumann,reflected_quotient,reflected_defect,slack,holds
  dirichlet-scaling  eps,lambda_fem,lambda_fem_scaled,lambda_oracle,lambda_oracle_scaled,fem_oracle_gap
  balance            case,density,moment_norm,t,lemma_bound,lambda,slack,balanced,holds";

#[derive(Debug, Parser)]
#[command(name = "pspectra", version, about = "First p-Laplacian eigenvalue experiments", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one eigenproblem.
    Eigen(RunArgs),
    /// Band-factor sweep over decreasing ε.
    SweepEps(RunArgs),
    /// Compare solved eigenvalues of a batch of unit-volume factors with an upper bound.
    VerifyBound {
        #[command(flatten)]
        run: RunArgs,
        /// Divide the bound by 10 (harness self-test; the check must fail).
        #[arg(long)]
        corrupt_bound: bool,
    },
    /// Sphere versus Neumann hemisphere for equator-symmetric factors.
    Reflect(RunArgs),
    /// Dirichlet eigenvalues of (−ε, ε) times ε^p, FEM and shooting.
    DirichletScaling(RunArgs),
    /// Balance the sphere for a density and compare λ with the map-energy bound.
    Balance(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads for independent cases.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// How a command ended when no error was raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
    CheckFailed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => exit::SUCCESS,
            Self::NotConverged => exit::NOT_CONVERGED,
            Self::CheckFailed => exit::CHECK_FAILED,
        }
    }

    /// Failed checks outrank non-convergence.
    pub fn from_flags(checks_hold: bool, converged: bool) -> Self {
        if !checks_hold {
            Self::CheckFailed
        } else if !converged {
            Self::NotConverged
        } else {
            Self::Success
        }
    }
}

/// Everything a command needs besides its own flags.
pub struct Context {
    pub config: ExperimentConfig,
    /// Directory of the config file; relative paths resolve against it.
    pub base: PathBuf,
    pub artifacts: Artifacts,
    pool: Option<rayon::ThreadPool>,
}

impl Context {
    pub fn new(args: &RunArgs, command: &str) -> Result<Self, CliError> {
        let config = ExperimentConfig::load(&args.config)?;
        config.validate(command)?;
        let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
        let out = match (&args.out, &config.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => base.join(o),
            (None, None) => return Err(CliError::Config("no output directory: set `out` or pass --out".into())),
        };
        Self::from_config(config, base, &out, args.jobs)
    }

    /// A context for an already validated config.
    pub fn from_config(config: ExperimentConfig, base: PathBuf, out: &Path, jobs: usize) -> Result<Self, CliError> {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        let pool = if jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| CliError::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { config, base, artifacts: Artifacts::new(out)?, pool })
    }

    /// Maps `f` over `items`, concurrently when `--jobs` > 1, keeping order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| items.par_iter().enumerate().map(|(k, x)| f(k, x)).collect()),
            None => items.iter().enumerate().map(|(k, x)| f(k, x)).collect(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INVALID } else { exit::SUCCESS };
        }
    };
    match dispatch(&cli.command) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e}");
            exit::INVALID
        }
    }
}

pub fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Eigen(a) => commands::eigen::run(&Context::new(a, "eigen")?),
        Command::SweepEps(a) => commands::sweep::run(&Context::new(a, "sweep-eps")?),
        Command::VerifyBound { run, corrupt_bound } => {
            commands::verify::run(&Context::new(run, "verify-bound")?, *corrupt_bound)
        }
        Command::Reflect(a) => commands::reflect::run(&Context::new(a, "reflect")?),
        Command::DirichletScaling(a) => commands::dirichlet::run(&Context::new(a, "dirichlet-scaling")?),
        Command::Balance(a) => commands::balance::run(&Context::new(a, "balance")?),
    }
}
