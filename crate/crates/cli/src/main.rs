//! `dshi`: simulate DSHI beat notes, estimate linewidths, and run the
//! trapped-ion spectroscopy cross-checks.

mod bumps;
mod config;
mod fit;
mod ionsim;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_file, CliResult};

#[derive(Parser)]
#[command(name = "dshi", version, about = "Delayed self-heterodyne linewidth toolkit")]
struct Cli {
    /// TOML file with the same keys as the long flags; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Progress on stderr; repeat for more
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write analytic or Monte-Carlo DSHI traces, optionally swept
    Simulate(simulate::SimulateArgs),
    /// Estimate the linewidth of a trace and write a report
    Fit(fit::FitArgs),
    /// Simulate ion spectroscopy and fit the result
    Ionsim(ionsim::IonArgs),
    /// Divide a measured trace by a model to expose servo bumps
    Bumps(bumps::BumpsArgs),
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Simulate(a) => simulate::run(a.overlay(load_file(file)?), cli.verbose),
        Command::Fit(a) => fit::run(a.overlay(load_file(file)?), cli.verbose),
        Command::Ionsim(a) => ionsim::run(a.overlay(load_file(file)?), cli.verbose),
        Command::Bumps(a) => bumps::run(a.overlay(load_file(file)?), cli.verbose),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
