//! Batch front-end for the cylradon library.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::Context;

/// Exit code and message for a failed run.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    /// Configuration or usage error (exit code 2).
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    /// Numerical failure (exit code 3).
    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cylradon::Error> for Failure {
    fn from(e: cylradon::Error) -> Self {
        use cylradon::Error::*;
        match e {
            InvalidGrid(_)
            | InvalidParameter(_)
            | CoefficientCount { .. }
            | NullSpaceEmpty(_)
            | OddInput
            | MissingBoundaryData
            | Io(_) => Failure::usage(e.to_string()),
            _ => Failure::numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cylradon",
    version,
    about = "Parametric Radon transform on the cylinder and its dual"
)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Highest circular harmonic used by analysis and inversion.
    #[arg(long, global = true, value_name = "N")]
    modes: Option<u32>,
    /// Angular quadrature nodes.
    #[arg(long = "quad-nodes", global = true, value_name = "K")]
    quad_nodes: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Phantom id for the input field.
    #[arg(long, global = true, value_name = "ID")]
    phantom: Option<String>,
    /// CSV input field.
    #[arg(long, global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Phantom id to compare the output against.
    #[arg(long, global = true, value_name = "ID")]
    reference: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transform a cylinder field to a sphere grid (theta,rho,re,im).
    Forward,
    /// Reconstruct a cylinder field from sphere data.
    Invert,
    /// Dual transform of a sphere field to a cylinder grid (s,t,re,im).
    Dual,
    /// Recover a sphere field from dual transform data.
    Dualinvert,
    /// Run a verification suite: cormack, bound, nullspace, support, duality or all.
    Check { suite: String },
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("CYLRADON_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!(
            "CYLRADON_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    init_threads()?;
    let mut config = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::Config::default(),
    };
    if cli.modes.is_some() {
        config.modes = cli.modes;
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.quad_nodes.is_some() {
        config.quadrature.n_angular = cli.quad_nodes;
    }
    if let Some(id) = cli.phantom {
        config.phantom = Some(id);
        config.input = None;
    }
    if let Some(path) = cli.input {
        config.input = Some(path);
        config.phantom = None;
    }
    if cli.reference.is_some() {
        config.reference = cli.reference;
    }
    let quad = config.quadrature.apply();
    quad.validate()?;
    let ctx = Context {
        seed: config.seed.unwrap_or(0),
        config,
        out: cli.out,
        quad,
    };
    match &cli.command {
        Command::Forward => commands::forward(&ctx),
        Command::Invert => commands::invert(&ctx),
        Command::Dual => commands::dual(&ctx),
        Command::Dualinvert => commands::dualinvert(&ctx),
        Command::Check { suite } => commands::check(&ctx, suite),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
