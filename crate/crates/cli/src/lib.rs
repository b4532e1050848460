//! Config-driven front end for `popgen-dyn`: trajectory export, equilibrium
//! reports, verification suites and parameter sweeps.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] popgen_dyn::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("all {0} sweep points failed")]
    SweepFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::SweepFailed(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "popgen-dyn",
    version,
    about = "Two-allele population dynamics: simulate, solve equilibria, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured model and write the trajectory CSV.
    Simulate(CommonArgs),
    /// Report monomorphic capacities, the neutral level and the population bound.
    Equilibria(CommonArgs),
    /// Run the configured verification checks.
    Verify(CommonArgs),
    /// Re-run the simulation over a list of values of one parameter.
    Sweep(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for outputs; relative output paths resolve against it.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Equilibria(a) => commands::equilibria(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
    }
}
