//! Command-line driver: `qwall <command> --config <path> --out <dir> [--seed N] [--plots]`.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod io;
mod plot;
mod setup;

use clap::{Args, Parser, Subcommand};
use setup::CliResult;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qwall", version, about = "Wall-state protection of a logical subsystem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the wall frame Û and write the rotated Hamiltonian.
    FindFrame(Common),
    /// Search for the wall state ŵ.
    FindWall(Common),
    /// Logical-purity trajectories under measurement, dissipation or driving.
    Simulate(Common),
    /// Dynamical decoupling against wall driving, in the identity and optimized frames.
    DdCompare(Common),
    /// Eternal lower bound on the logical purity under wall driving.
    EternalBound(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    plots: bool,
}

type Runner = fn(&config::Config, u64, &mut io::Output) -> CliResult<()>;

fn run(name: &str, args: &Common, f: Runner) -> CliResult<()> {
    let mut cfg = config::Config::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let mut out = io::Output::create(&args.out, args.plots)?;
    f(&cfg, cfg.seed, &mut out)?;
    out.finish(name, cfg.seed, &cfg.to_toml())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args, f): (&str, &Common, Runner) = match &cli.command {
        Command::FindFrame(a) => ("find-frame", a, commands::find_frame),
        Command::FindWall(a) => ("find-wall", a, commands::find_wall),
        Command::Simulate(a) => ("simulate", a, commands::simulate),
        Command::DdCompare(a) => ("dd-compare", a, commands::dd_compare),
        Command::EternalBound(a) => ("eternal-bound", a, commands::eternal_bound),
    };
    match run(name, args, f) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwall {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
