//! Command-line driver: `fplap <command> [flags]`.
//!
//! Configuration is resolved as defaults, then the `--config` file, then
//! flags. Every command writes a JSON report (with the resolved config, the
//! version and the operator convention) plus CSV and two-column plot data into
//! the output directory.
//!
//! Exit codes: 0 success, 1 invalid input, 2 solver did not converge or the
//! solution failed verification, 3 internal error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use commands::SolveBranch;
use fplap_core::Mode;
use config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] fplap_core::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fplap_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Input(_) => 1,
            CliError::VerifyFailed(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidDomain(_)
                | E::InvalidExponent(_)
                | E::InvalidParams(_)
                | E::MeshMismatch
                | E::SupercriticalAlpha { .. }
                | E::InvalidMode(_)
                | E::ZeroFunction => 1,
                E::NotConverged { .. }
                | E::MonotonicityViolation { .. }
                | E::NoTwoRoots { .. }
                | E::EmptyInterval(_)
                | E::BracketFail(_)
                | E::NonPositiveEigenvector
                | E::NonPositiveValue { .. }
                | E::NonFiniteValue { .. }
                | E::SingularLog { .. } => 2,
                _ => 3,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fplap", version, about = "Discrete fractional p-Laplacian problems with a singular nonlinearity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal eigenpair.
    Eigen(Common),
    /// Embedding constants, threshold formulas and the fibering threshold estimate.
    Constants(Common),
    /// Fiber map along the principal eigenfunction.
    Fiber(Common),
    /// Solve on one branch.
    Solve(SolveArgs),
    /// Monotone iteration between a sub- and a super-solution.
    Monotone(Common),
    /// Existence sweep over a logarithmic lambda grid.
    Sweep(Common),
    /// Check a stored solution.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
    PureSingular,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Solution CSV with columns x,u.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `full` or `pure_singular`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Number of interior nodes.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub eigen_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Number of grid points of the sweep.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub bisection_steps: Option<usize>,
    #[arg(long)]
    pub super_lambda: Option<f64>,
    /// Directory for cached kernel weights.
    #[arg(long)]
    pub kernel_cache: Option<PathBuf>,
}

impl Common {
    /// Defaults, then the config file, then flags; validated.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        self.resolve_with(None)
    }

    /// As [`Common::resolve`] with the mode fixed by the command.
    pub fn resolve_with(&self, mode: Option<Mode>) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
                line: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            cfg.apply_text(&text)?;
        }
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { cfg.$f = v; } )* };
        }
        apply!(s, p, q, alpha, lambda, a, b, n, out, seed, tol, eigen_tol, max_iter, starts, delta, samples,
               lambda_min, lambda_max, grid, bisection_steps);
        if let Some(v) = self.super_lambda {
            cfg.super_lambda = Some(v);
        }
        if let Some(v) = &self.kernel_cache {
            cfg.kernel_cache = Some(v.clone());
        }
        if let Some(m) = &self.mode {
            cfg.set("mode", m).map_err(|message| ConfigError::Validation { field: "mode".into(), message })?;
        }
        if let Some(m) = mode {
            cfg.mode = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cli: Cli) -> Result<PathBuf, CliError> {
    match cli.command {
        Command::Eigen(c) => commands::eigen(&c.resolve()?),
        Command::Constants(c) => commands::constants(&c.resolve()?),
        Command::Fiber(c) => commands::fiber(&c.resolve()?),
        Command::Solve(a) => {
            let branch = match a.branch {
                BranchArg::Plus => SolveBranch::Plus,
                BranchArg::Minus => SolveBranch::Minus,
                BranchArg::PureSingular => SolveBranch::PureSingular,
            };
            let mode = (branch == SolveBranch::PureSingular).then_some(Mode::PureSingular);
            commands::solve(&a.common.resolve_with(mode)?, branch)
        }
        Command::Monotone(c) => commands::monotone(&c.resolve()?),
        Command::Sweep(c) => commands::sweep(&c.resolve()?),
        Command::Verify(a) => commands::verify(&a.common.resolve()?, &a.input),
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
/// All messages go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
