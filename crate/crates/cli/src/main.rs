//! `ldsim`: scenario generation, accuracy evaluation, optimal delegation,
//! trust dynamics and Condorcet curves.
//!
//! Exit codes: 0 ok, 1 I/O or malformed input, 2 usage, 3 invalid profile,
//! 4 search space too large.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "ldsim", version, about = "Liquid-democracy delegation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a network as JSON.
    Scenario(ScenarioArgs),
    /// Probability that a profile decides correctly.
    Accuracy(AccuracyArgs),
    /// Find the best delegation profile.
    Odp(OdpArgs),
    /// Simulate repeated polls with trust learning; writes CSV.
    Dynamics(DynamicsArgs),
    /// Majority accuracy of n equal voters for odd n up to --n-max; writes CSV.
    Jury(JuryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Star,
    InvertedStar,
    Example2,
    Random,
}

#[derive(Debug, Args, Serialize)]
struct ScenarioArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of agents (star kinds and random).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = ldsim::scenarios::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Out-degree for random networks.
    #[arg(long)]
    k: Option<usize>,
    /// Full random-scenario config (JSON); --n, --k and --seed override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AccuracyArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Profile JSON: {"agent": "target" | "direct"}.
    #[arg(long, conflicts_with = "all_profiles")]
    profile: Option<PathBuf>,
    /// Evaluate every valid profile and report min/max.
    #[arg(long)]
    all_profiles: bool,
    /// Also estimate by Monte Carlo with this many trials.
    #[arg(long, conflicts_with = "all_profiles")]
    mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct OdpArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    cap: Option<u32>,
    /// Use local search instead of exhaustive enumeration.
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = 1000)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct DynamicsArgs {
    /// Random-scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    epochs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct JuryArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n_max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("{0}")]
    SearchTooLarge(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Usage(_) => 2,
            CliError::InvalidProfile(_) => 3,
            CliError::SearchTooLarge(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scenario(args) => commands::scenario(args),
        Command::Accuracy(args) => commands::accuracy(args),
        Command::Odp(args) => commands::odp(args),
        Command::Dynamics(args) => commands::dynamics(args),
        Command::Jury(args) => commands::jury(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ldsim: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
