mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{census, energy, enumerate, percolate, project, spectrum, verify};
use config::ConfigFile;
use manifest::{emit, Outcome};

/// Projections, energies and spectra of point sets in F_p^n.
#[derive(Debug, Parser)]
#[command(name = "ffproj", version)]
struct Cli {
    /// TOML file of settings keyed by flag name; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Enumerate(enumerate::EnumerateArgs),
    Census(census::CensusArgs),
    Verify(verify::VerifyArgs),
    Percolate(percolate::PercolateArgs),
    Spectrum(spectrum::SpectrumArgs),
    Energy(energy::EnergyArgs),
    Project(project::ProjectArgs),
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Enumerate(a) => enumerate::run(a, &cfg),
        Command::Census(a) => census::run(a, &cfg),
        Command::Verify(a) => verify::run(a, &cfg),
        Command::Percolate(a) => percolate::run(a, &cfg),
        Command::Spectrum(a) => spectrum::run(a, &cfg),
        Command::Energy(a) => energy::run(a, &cfg),
        Command::Project(a) => project::run(a, &cfg),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    let outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&outcome, started, cli.out.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let failed: Vec<_> = outcome.checks.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    for c in failed {
        eprintln!("FAILED {}: {}", c.name, c.detail.as_deref().unwrap_or(""));
    }
    ExitCode::from(1)
}
