//! `hbo`: config-driven experiments for hierarchical data-mixture
//! scheduling. Subcommands generate corpora, execute (multi-seed) runs,
//! compare completed runs, and flatten trajectories into plot-ready CSV.
//!
//! Every command is deterministic given its config and seeds: outputs are
//! byte-identical across repeats except for the single header line that
//! carries wall-clock values. Failures print `error[<class>]: <detail>` on
//! stderr and exit nonzero.

mod commands;
mod config;
mod error;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hbo", version, about = "Hierarchical balancing optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the config's synthetic corpus and write it to a file.
    Generate {
        /// Experiment config (TOML).
        config: PathBuf,
        /// Destination corpus file (JSON lines).
        out: PathBuf,
    },
    /// Execute the configured run, or one run per sweep seed.
    Run {
        /// Experiment config (TOML).
        config: PathBuf,
    },
    /// Report per-method means and paired differences of completed runs.
    Compare {
        /// Experiment config (TOML) naming the label and seed list.
        config: PathBuf,
    },
    /// Flatten a trajectory file into wide CSV on stdout.
    Plotdata {
        /// Trajectory file written by the run command (JSON lines).
        trajectory: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { config, out } => commands::generate(&config, &out),
        Command::Run { config } => commands::run(&config),
        Command::Compare { config } => commands::compare(&config),
        Command::Plotdata { trajectory } => commands::plotdata(&trajectory),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
