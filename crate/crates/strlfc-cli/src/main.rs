//! Command-line front end for the systematic fountain-coding toolkit.
//!
//! Exit codes: 0 success, 1 validation failure, 2 runtime error,
//! 3 simulation-vs-analytic mismatch.

mod commands;
mod config;
mod output;
mod svg;

use clap::{Parser, Subcommand};
use config::{CommonArgs, RunConfig};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "strlfc",
    version,
    about = "Bounds, simulations, and decoding-schedule optimization for systematic \
             fountain coding over binary erasure channels with stop feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate achievability and converse bounds over message lengths.
    Bounds(CommonArgs),
    /// Backoff-from-capacity bounds over an erasure-probability grid.
    Backoff(CommonArgs),
    /// Expected-rank advantage of systematic transmission per message length.
    Rankgap(CommonArgs),
    /// Optimize finite decoding-time schedules and tabulate their rates.
    Schedules(CommonArgs),
    /// Run a seeded Monte Carlo simulation and cross-check analytic values.
    Simulate(CommonArgs),
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
    Mismatch(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) | CliError::Mismatch(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds(args) => commands::cmd_bounds(&RunConfig::resolve(&args)?),
        Command::Backoff(args) => commands::cmd_backoff(&RunConfig::resolve(&args)?),
        Command::Rankgap(args) => commands::cmd_rankgap(&RunConfig::resolve(&args)?),
        Command::Schedules(args) => commands::cmd_schedules(&RunConfig::resolve(&args)?),
        Command::Simulate(args) => commands::cmd_simulate(&RunConfig::resolve(&args)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
