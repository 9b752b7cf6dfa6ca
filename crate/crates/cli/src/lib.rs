//! Configuration, orchestration and file output for the photon blockade
//! breakdown toolkit.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pbb",
    version,
    about = "Photon blockade breakdown: mean-field roots, trajectories and telegraph analysis"
)]
pub struct Cli {
    /// TOML run configuration; every key is optional.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores), overriding PBB_THREADS and
    /// `output.threads`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Real roots of the mean-field equations over the drive sweep.
    ClassicalRoots,
    /// Bistable window against detuning for each theory and decay rate.
    Boundary,
    /// Trajectory ensembles with telegraph analysis, optionally searching
    /// for half-filling.
    Ensemble,
    /// Re-analyze trajectory files written by `ensemble`.
    Analyze {
        /// Trajectory directory; defaults to `<output.dir>/trajectories`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Bright-state model curves with optional trajectory overlays.
    BrightModel,
    /// Print the fully resolved configuration.
    DefaultConfig,
}

/// Runs a parsed command line; returns what to print on stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output.dir = out.display().to_string();
        config.validate()?;
    }
    if let Command::DefaultConfig = cli.command {
        return Ok(config.emit());
    }
    let (_, exec) = config.execution(cli.threads)?;
    let ctx = Context { config, exec };
    let written = match &cli.command {
        Command::ClassicalRoots => vec![commands::classical_roots(&ctx)?],
        Command::Boundary => vec![commands::boundary(&ctx)?],
        Command::Ensemble => commands::ensemble(&ctx)?,
        Command::Analyze { input } => vec![commands::analyze(&ctx, input.as_deref())?],
        Command::BrightModel => vec![commands::bright_model(&ctx)?],
        Command::DefaultConfig => unreachable!(),
    };
    Ok(written
        .iter()
        .map(|p| format!("wrote {}\n", p.display()))
        .collect())
}
