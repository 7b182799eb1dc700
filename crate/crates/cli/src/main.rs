//! `slowlight`: desk-scale runs of the slow-light condensate model.

mod commands;
mod config;
mod error;
mod output;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{LoadedConfig, DEFAULT_CONFIG};
use crate::error::CliError;
use crate::output::OutputDir;

/// Ultraslow probe pulses in EIT-dressed Bose-Einstein condensates.
///
/// Every command reads one JSON config (the bundled sodium operating point
/// when `--config` is absent) and writes CSV files with a `#` metadata block
/// into the configured output directory. The environment variable
/// SLOWLIGHT_OUTPUT_DIR overrides that directory.
///
/// Exit codes: 0 success, 2 config error, 3 physics-domain error,
/// 4 solver error, 1 I/O failure.
#[derive(Debug, Parser)]
#[command(name = "slowlight", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, short, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagation coefficients along the cloud axis (coefficients.csv).
    Coefficients,
    /// Split-step propagation of the configured pulse (propagation.csv, envelope.csv).
    Propagate {
        /// Switch off the Kerr nonlinearity.
        #[arg(long)]
        linear: bool,
        /// Set the peak intensity to the soliton-number-one value.
        #[arg(long)]
        compensate: bool,
    },
    /// Storage capacity point values and configured sweeps.
    Capacity,
    /// Guided LP modes, their profiles and a temperature scan of the mode count.
    Modes,
    /// Condensed and thermal densities on the (r, z) grid (density.csv).
    Density,
    /// Print the bundled default config.
    DefaultConfig,
}

fn load(path: Option<&PathBuf>) -> Result<LoadedConfig, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            LoadedConfig::parse(text, p.display().to_string())
        }
        None => LoadedConfig::parse(DEFAULT_CONFIG.to_owned(), "default config"),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::DefaultConfig = cli.command {
        print!("{DEFAULT_CONFIG}");
        return Ok(());
    }
    let loaded = load(cli.config.as_ref())?;
    let resolved = loaded.resolve()?;
    let mut out = OutputDir::resolve(&loaded.config.output_dir)?;
    for line in &resolved.conversions {
        eprintln!("{line}");
    }
    let mut log = resolved.conversions.clone();
    let mut ctx = Context {
        loaded: &loaded,
        run: resolved,
        out: &mut out,
    };
    let outcome = match cli.command {
        Command::Coefficients => commands::coefficients(&mut ctx)?,
        Command::Propagate { linear, compensate } => commands::propagate(&mut ctx, linear, compensate)?,
        Command::Capacity => commands::capacity(&mut ctx)?,
        Command::Modes => commands::modes(&mut ctx)?,
        Command::Density => commands::density(&mut ctx)?,
        Command::DefaultConfig => unreachable!(),
    };
    for line in &outcome.log {
        println!("{line}");
    }
    log.extend(outcome.log);
    out.write_log(&log)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slowlight: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
