//! `dirac1d`: spectra, vacuum densities, anomaly fits, time evolution and
//! free-field checks for the 1+1D Dirac field in a square well.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use config::RunConfig;

/// Environment variable fixing the worker thread count.
const THREADS_VAR: &str = "DIRAC1D_THREADS";

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Spectrum,
    Density,
    Anomaly,
    Evolve,
    Freefield,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Density => "density",
            Command::Anomaly => "anomaly",
            Command::Evolve => "evolve",
            Command::Freefield => "freefield",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dirac1d", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `<output.directory>/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `section.key=value`, applied after the file is read.
    #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR}: expected a positive integer, got `{raw}`"))?;
    anyhow::ensure!(n > 0, "{THREADS_VAR}: expected a positive integer, got 0");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let cfg = RunConfig::load(&cli.config, &cli.overrides)?;
    let dir = cli
        .out
        .unwrap_or_else(|| cfg.output.directory.join(cli.command.name()));
    match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &dir),
        Command::Density => commands::density(&cfg, &dir),
        Command::Anomaly => commands::anomaly(&cfg, &dir),
        Command::Evolve => commands::evolve(&cfg, &dir),
        Command::Freefield => commands::freefield(&cfg, &dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
