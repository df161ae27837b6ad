//! Command-line driver: `validate-kernel`, `eig`, `sweep` and `poisson`.
//!
//! Exit codes: 0 success, 1 numerical or acceptance failure, 2 usage or
//! configuration error.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<pim_core::Error> for CliError {
    fn from(e: pim_core::Error) -> Self {
        match e {
            pim_core::Error::UnsupportedConfiguration(m) => CliError::Config(format!("unsupported: {m}")),
            other => CliError::Failure(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "pim", version, about = "Kernel Laplacian spectra and point integral Poisson solves on sampled manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the kernel admissibility clauses.
    ValidateKernel(CommonArgs),
    /// Solve one eigenproblem and export points, matrices and eigenpairs.
    Eig(CommonArgs),
    /// Run the eigenvalue error sweep.
    Sweep(CommonArgs),
    /// Solve the point integral Poisson system.
    Poisson(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `sample.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output formats; defaults to csv and json.
    #[arg(long = "format", value_enum)]
    pub formats: Vec<Format>,
    /// Worker threads for sweep cells.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    pub fn wants(&self, f: Format) -> bool {
        if self.formats.is_empty() {
            matches!(f, Format::Csv | Format::Json)
        } else {
            self.formats.contains(&f)
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    pim_core::linalg::dense::use_single_thread();
    let result = match &cli.command {
        Command::ValidateKernel(a) => commands::validate_kernel(a),
        Command::Eig(a) => commands::eig(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Poisson(a) => commands::poisson(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
