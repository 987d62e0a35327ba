//! `tduofc`: train grokking runs, probe their gradients into avalanche
//! records, and run every downstream scaling analysis from the command line.
//!
//! All outputs are plain files (tabular text plus binary snapshots); every
//! subcommand is deterministic given its flags and input directories.

mod analyze;
mod load;
mod out;
mod probe;
mod repro;
mod sweep;
mod train;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "tduofc",
    version,
    about = "Gradient-cascade avalanche probe and finite-size scaling toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run (XOR MLP or ModAdd transformer) with the probe attached
    Train(train::TrainArgs),
    /// Run a Cartesian parameter sweep from a JSON spec, one directory per cell
    Sweep(sweep::SweepArgs),
    /// Probe stored gradient snapshots (own runs or ingested directories)
    Probe(probe::ProbeArgs),
    /// Analyses over run directories; each emits tabular outputs plus a summary
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCmd),
    /// The full canonical pipeline: ModAdd-59 sweep, then fss, bootstrap,
    /// loo, ccdf and crossing. Long-running; see --help for scale flags.
    Repro(repro::ReproArgs),
}

/// Default output root: --out beats TDUOFC_OUT beats ./runs.
pub(crate) fn resolve_out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("TDUOFC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => train::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Probe(args) => probe::run(args),
        Command::Analyze(cmd) => analyze::run(cmd),
        Command::Repro(args) => repro::run(args),
    }
}
