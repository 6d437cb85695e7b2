//! Pipeline entry point: envelope extraction, sample filtering, mixture
//! synthesis, posterior decoding, and PSDS evaluation as subcommands.
//!
//! Every subcommand is deterministic given its flags and inputs; `--seed` is
//! the only entropy source. Diagnostics go to stderr, machine-readable
//! output to files and stdout, and the exit code is zero exactly when the
//! run succeeded.

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sedpipe",
    version,
    about = "Soundscape dataset synthesis and sound-event-detection evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export energy-envelope control signals for an external generator
    Envelope(commands::envelope::Args),
    /// Rank-fuse external scores and keep the top samples per class
    Filter(commands::filter::Args),
    /// Render strongly labeled soundscape mixtures from a sound bank
    Synth(commands::synth::Args),
    /// Decode posterior matrices into per-threshold detection lists
    Decode(commands::decode::Args),
    /// Score detections (or posteriors) against ground truth with PSDS
    Evaluate(commands::evaluate::Args),
    /// Summarize a synthesis manifest or an evaluation report
    Report(commands::report::Args),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Envelope(args) => commands::envelope::run(args),
        Command::Filter(args) => commands::filter::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Decode(args) => commands::decode::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
