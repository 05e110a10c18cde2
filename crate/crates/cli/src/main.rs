//! `hyperband`: experiments with band-limited signals on the hyperbolic plane.

mod commands;
mod config;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};

use crate::commands::{exit_code, Failure, Run};
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Write a random band-limited probe and its spectrum.
    Synth,
    /// Write a sampling lattice and the probe's samples on it.
    Lattice,
    /// Recover a band-limited signal from its samples.
    Reconstruct,
    /// Contraction and convergence for each spacing in `sweep_eps`.
    Sweep,
    /// Run the invariant checks and print a pass/fail table.
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "hyperband", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Sample file (`x,y,re,im`) for `reconstruct`.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("HYPERBAND_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Validation(format!("HYPERBAND_THREADS must be a positive integer, found `{value}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let (mut cfg, text) =
        ExperimentConfig::load(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if cli.samples.is_some() && cli.command != Command::Reconstruct {
        return Err(Failure::Validation("--samples is only used by reconstruct".into()).into());
    }
    let run = Run::new(cfg, text);
    match cli.command {
        Command::Synth => commands::synth(run),
        Command::Lattice => commands::lattice(run),
        Command::Reconstruct => commands::reconstruct_cmd(run, cli.samples.as_deref()),
        Command::Sweep => commands::sweep(run),
        Command::Verify => commands::verify(run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
