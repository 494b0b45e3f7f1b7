//! Command-line front end for the phase-and-loss estimation toolkit: Fisher
//! tables, trade-off scans, probe optimization, and the self-check suite.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{CliError, EtaGrid, RunConfig};

#[derive(Parser)]
#[command(
    name = "lossphase",
    version,
    about = "Fisher-information toolkit for joint phase and loss estimation \
             with fixed-photon-number two-mode probes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Quantum and measured Fisher information per (probe, eta)
    Qfi(CommonArgs),
    /// Precision trade-off scan across the probe families
    Tradeoff(CommonArgs),
    /// Optimize probe weights over the simplex
    Optimize(CommonArgs),
    /// Run the cross-module self-checks
    Validate(ValidateArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Total photon number
    #[arg(long)]
    pub n: Option<usize>,
    /// Single transmissivity, strictly inside (0, 1)
    #[arg(long)]
    pub eta: Option<f64>,
    /// Evenly spaced transmissivity grid
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"])]
    pub eta_grid: Option<Vec<f64>>,
    /// Probe family: noon | hb | fock | uniform | file:PATH | optimize
    #[arg(long)]
    pub probe: Option<String>,
    /// Optimizer objective: joint | phase
    #[arg(long)]
    pub objective: Option<String>,
    /// Master seed for the optimizer multistarts
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table format: csv | json
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Largest photon number the oracle sweeps use
    #[arg(long)]
    pub n_budget: Option<usize>,
    /// Run only checks whose name contains this substring
    #[arg(long)]
    pub check: Option<String>,
    /// Seed for the randomized check probes
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for the report
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table format: csv | json
    #[arg(long)]
    pub format: Option<String>,
}

fn grid_from_flag(raw: &[f64]) -> Result<EtaGrid, CliError> {
    let count = raw[2];
    if count < 1.0 || count.fract() != 0.0 {
        return Err(CliError::Usage(format!(
            "eta grid count must be a positive integer, got {count}"
        )));
    }
    Ok(EtaGrid {
        start: raw[0],
        stop: raw[1],
        count: count as usize,
    })
}

fn resolve_common(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let base = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        n: args.n,
        eta: args.eta,
        eta_grid: args.eta_grid.as_deref().map(grid_from_flag).transpose()?,
        probe: args.probe.clone(),
        objective: args.objective.clone(),
        seed: args.seed,
        out: args.out.clone(),
        format: args.format.clone(),
        n_budget: None,
        check: None,
    };
    Ok(base.overridden_by(flags))
}

fn resolve_validate(args: &ValidateArgs) -> Result<RunConfig, CliError> {
    let base = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let flags = RunConfig {
        n_budget: args.n_budget,
        check: args.check.clone(),
        seed: args.seed,
        out: args.out.clone(),
        format: args.format.clone(),
        ..RunConfig::default()
    };
    Ok(base.overridden_by(flags))
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Qfi(args) => resolve_common(args).and_then(|cfg| commands::run_qfi(&cfg)),
        Command::Tradeoff(args) => {
            resolve_common(args).and_then(|cfg| commands::run_tradeoff(&cfg))
        }
        Command::Optimize(args) => {
            resolve_common(args).and_then(|cfg| commands::run_optimize(&cfg))
        }
        Command::Validate(args) => {
            resolve_validate(args).and_then(|cfg| commands::run_validate(&cfg))
        }
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}
