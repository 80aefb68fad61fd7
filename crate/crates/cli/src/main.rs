//! Command-line front-end: reads a TOML run configuration and writes CSV.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 physically
//! invalid operating point, 4 numerical failure or non-convergence.

mod commands;
mod config;
mod error;
mod output;
mod record;

use clap::{Parser, Subcommand};
use commands::{Context, Report};
use config::Config;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "subsql", version, about = "Quantum-noise spectra of interferometric displacement readout")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV; stdout if absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding simulate.seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Homodyne angle in rad, overriding detection.theta_rad
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Write single-sided spectral densities (twice the double-sided values)
    #[arg(long, global = true)]
    single_sided: bool,
    /// Suppress the summary on stderr
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Displacement noise budget versus frequency at one angle
    Spectrum,
    /// Ratio to the SQL on an (angle, frequency) grid
    Heatmap,
    /// Frequency-dependent optimal angle and the resulting noise
    Optimize,
    /// Time-domain simulation and photocurrent spectra
    Simulate,
    /// Backaction-referenced calibration of a voltage spectrum
    Calibrate,
    /// Least-squares fit of a measured spectrum
    Fit,
    /// Force signal-to-noise relative to an SQL-limited readout
    Snr,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let config = Config::load(path)?;
    let mut sys = config.system()?;
    if let Some(theta) = cli.theta {
        sys = sys.with_theta(theta)?;
    }
    let ctx = Context {
        config,
        sys,
        seed: cli.seed,
        single_sided: cli.single_sided,
        quiet: cli.quiet,
    };
    let report: Report = match cli.command {
        Command::Spectrum => commands::spectrum(&ctx)?,
        Command::Heatmap => commands::heatmap(&ctx)?,
        Command::Optimize => commands::optimize(&ctx)?,
        Command::Simulate => commands::simulate(&ctx)?,
        Command::Calibrate => commands::calibrate(&ctx)?,
        Command::Fit => commands::fit(&ctx)?,
        Command::Snr => commands::snr(&ctx)?,
    };
    output::emit(&report.table, cli.out.as_deref())?;
    match report.after {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
