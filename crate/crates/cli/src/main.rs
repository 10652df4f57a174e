//! `kgml`: spectra, asymptotic exponents, wavefunctions and parameter
//! blocks of the Klein-Gordon Coulomb problem with and without a minimal
//! length.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Physics(#[from] kgml::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Physics(kgml::Error::InvalidInput(_)) => 1,
            CliError::Physics(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` file; flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bound-state energies, closed form against root finding
    Spectrum,
    /// Indicial exponents at infinity next to fitted decay rates
    Exponents,
    /// Sampled ψ(u) on a logarithmic grid
    Wavefunction,
    /// Heun or generalized Heun parameter block
    Params,
    /// Heun solution against its hypergeometric form at θ = θ′
    HeunCheck,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let cfg = RunConfig::resolve(cli.settings.or(file))?;
    let table = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Exponents => commands::exponents(&cfg)?,
        Command::Wavefunction => commands::wavefunction(&cfg)?,
        Command::Params => {
            let (t, warnings) = commands::params(&cfg)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            t
        }
        Command::HeunCheck => commands::heun_check(&cfg)?,
    };
    let text = table.render(cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
