//! The `fracwave` command-line front end.
//!
//! ```text
//! fracwave solve|verify|convergence <config> [--out DIR] [--threads K] [--seed S]
//! ```
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical precondition failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::fracode::FodeError;
use crate::galerkin::GalerkinError;
use crate::verify::VerifyError;

mod commands;
pub mod config;
mod diagnostic;
pub mod output;

pub use config::{ConfigError, ProblemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracwave", version, about = "Time-fractional diffusion-wave solver and estimate verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem and write field.csv, coeffs.csv, norms.json, run.json.
    Solve(CommonArgs),
    /// Run the inequality and estimate batteries and write witnesses.json.
    Verify(CommonArgs),
    /// Run the refinement ladder and write convergence.csv.
    Convergence(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Problem file (TOML).
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, env = "FRACWAVE_THREADS")]
    pub threads: Option<usize>,
    /// Overrides `problem.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("error: cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("error: {0}")]
    Precondition(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Precondition(_) => EXIT_PRECONDITION,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<FodeError> for CliError {
    fn from(e: FodeError) -> Self {
        match e {
            FodeError::RefineGrid { required, found } => CliError::Precondition(format!(
                "time step too coarse for the implicit scheme (n_steps = {found}); rerun with n_steps >= {required}"
            )),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<GalerkinError> for CliError {
    fn from(e: GalerkinError) -> Self {
        match e {
            GalerkinError::Fode(f) => f.into(),
            GalerkinError::Frac(f) => CliError::Precondition(f.to_string()),
            other => CliError::Config(format!("error: {other}")),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Galerkin(g) => g.into(),
            VerifyError::Fode(f) => f.into(),
            VerifyError::InvalidArgument(m) => CliError::Config(format!("error: {m}")),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<i32, CliError> {
    let args = match command {
        Command::Solve(a) | Command::Verify(a) | Command::Convergence(a) => a,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = args.threads {
        pool = pool.num_threads(k);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("error: cannot start {:?} worker threads: {e}", args.threads)))?;
    let threads = pool.current_num_threads();
    pool.install(|| {
        let ctx = commands::Context::load(args, threads)?;
        match command {
            Command::Solve(_) => commands::solve(&ctx),
            Command::Verify(_) => commands::verify(&ctx),
            Command::Convergence(_) => commands::convergence(&ctx),
        }
    })
}
