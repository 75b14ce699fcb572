//! pressure-lab: batch experiments on conservative torus maps and
//! subshifts, driven by TOML configs.
//!
//! Exit codes: 0 success, 2 validation or I/O failure (no artifacts
//! written), 3 a budget ran out but the partial artifacts are on disk.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod manifest;
mod pipeline;

use pipeline::{CommandKind, Invocation, Outcome};

/// Pressure estimation, orbit catalogs, and hyperbolicity diagnostics.
#[derive(Parser)]
#[command(name = "pressure-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Catalog periodic orbits by seeded Newton search
    Orbits(RunArgs),
    /// Estimate pressure by the configured method
    Pressure(RunArgs),
    /// Per-horizon frame-growth suprema for k = 1 and 2
    Sigma(RunArgs),
    /// N-domination verdicts and singular-value gap series
    Domination(RunArgs),
    /// Pressure curve t -> P(t * phi_m), kinks, and zero crossing
    Transition(RunArgs),
    /// Run the periodic, Grassmann, and Bowen routes side by side
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output` in the config
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed override for all sampled searches
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to PRESSURE_LAB_THREADS, then all cores
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress the summary echo on stdout
    #[arg(long)]
    quiet: bool,
}

impl Command {
    fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Orbits(a) => (CommandKind::Orbits, a),
            Command::Pressure(a) => (CommandKind::Pressure, a),
            Command::Sigma(a) => (CommandKind::Sigma, a),
            Command::Domination(a) => (CommandKind::Domination, a),
            Command::Transition(a) => (CommandKind::Transition, a),
            Command::Validate(a) => (CommandKind::Validate, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let inv = Invocation {
        command: kind,
        config_path: &args.config,
        out_override: args.out.as_deref(),
        seed_override: args.seed,
        threads: args.threads,
        quiet: args.quiet,
    };
    match pipeline::execute(&inv) {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Exhausted(why)) => {
            eprintln!("budget exhausted: {why}");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
