//! `twoway`: panel regressions with cluster-robust standard errors.
//!
//! Subcommands: `fit` estimates a regression from a long-format CSV and
//! prints an inference table; `simulate` runs the coverage/power
//! experiments; `bandwidth` prints lag-truncation diagnostics for a
//! dataset. Exit codes are stable: 2 schema/parameter, 3 imbalance,
//! 4 collinearity, 5 I/O.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twoway_core::Error;

pub const EXIT_SCHEMA: u8 = 2;
pub const EXIT_IMBALANCE: u8 = 3;
pub const EXIT_COLLINEAR: u8 = 4;
pub const EXIT_IO: u8 = 5;

/// Map a core error to the documented exit code.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Unbalanced { .. } => EXIT_IMBALANCE,
        Error::Collinear { .. } => EXIT_COLLINEAR,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_SCHEMA,
    }
}

#[derive(Parser)]
#[command(
    name = "twoway",
    about = "Panel regressions with cluster-robust standard errors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a regression on a long-format CSV and print inference results.
    Fit(commands::fit::FitArgs),
    /// Run a deterministic coverage or power experiment.
    Simulate(commands::simulate::SimulateArgs),
    /// Print lag-truncation diagnostics for a dataset.
    Bandwidth(commands::bandwidth::BandwidthArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => commands::fit::run(&args),
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Bandwidth(args) => commands::bandwidth::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
