//! `hcx`: build complexes, solve, compute constants, estimate errors and
//! aggregate runs.

pub mod commands;
pub mod config;
pub mod json;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcx_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("budget exhausted before the bounds converged")]
    BudgetExhausted,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::BudgetExhausted => 5,
            CliError::Core(e) => match e {
                Error::Incompatible(_) => 3,
                Error::NonConvergence { .. }
                | Error::IllPosed { .. }
                | Error::NoNonzeroSingularValue { .. }
                | Error::NontrivialCohomology { .. }
                | Error::NotPositiveDefinite(_)
                | Error::KernelNotOrthonormal(_)
                | Error::CapExceeded { .. }
                | Error::ImplicitAdjoint { .. } => 4,
                _ => 2,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "hcx", version, about = "Hilbert complex solver and error estimator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a complex (and optionally a manufactured problem) from a config.
    Build(BuildArgs),
    /// Solve the first- or second-order system.
    Solve(SolveArgs),
    /// Poincaré constants of every (or one) operator.
    Constants(ConstantsArgs),
    /// Two-sided error bounds for an approximation.
    Estimate(EstimateArgs),
    /// Helmholtz decomposition of a field or of an error.
    Decompose(DecomposeArgs),
    /// Aggregate run directories into one CSV table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Variational,
    Saddle,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// TOML config with an [instance] section.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides [output] dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Manifest file or directory containing manifest.json.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Level of the unknown; defaults to the level in problem.json.
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<PathBuf>,
    /// Order of the system (1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: Option<u8>,
    /// Relative tolerance of the inner solves.
    #[arg(long)]
    pub tol: Option<f64>,
    /// TOML config supplying [tolerances].
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "variational")]
    pub backend: BackendArg,
    /// Start the iterative solves from a seeded nonzero vector.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub x_approx: PathBuf,
    /// Approximation of `y = A x` (second order only).
    #[arg(long)]
    pub y_approx: Option<PathBuf>,
    /// Exact solution, for efficiency indices.
    #[arg(long)]
    pub exact: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<usize>,
    /// Accepted for symmetry with the other commands; estimates are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub x_approx: PathBuf,
    /// Decompose `exact − x̃` instead of `x̃`.
    #[arg(long)]
    pub exact: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory whose subdirectories are runs.
    pub runs: PathBuf,
    /// Run names that must be present; missing ones get a warning row.
    #[arg(long, value_delimiter = ',')]
    pub expect: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hcx: {e}");
            e.exit_code()
        }
    }
}
