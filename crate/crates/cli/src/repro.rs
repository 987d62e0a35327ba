//! The `repro` meta-subcommand: the canonical ModAdd-59 pipeline as one
//! recipe: shadow-probe sweep over the canonical widths, then the full
//! analysis chain (fss, bootstrap, loo, ccdf, crossing).
//!
//! At the canonical scale (six widths d = 24..128, three seeds, epoch
//! budgets in the thousands) this is a CPU-hours to a day workload, not a
//! quick gate. The width/seed/epoch flags scale it down for smoke runs.

use crate::{analyze, sweep};
use anyhow::Result;
use clap::Args;
use std::fs;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct ReproArgs {
    /// Output root for the runs and analysis directories
    #[arg(long, env = "TDUOFC_OUT", default_value = "repro")]
    pub out: PathBuf,
    /// Transformer widths of the scale sweep
    #[arg(long, value_delimiter = ',', default_values_t = vec![24usize, 32, 48, 64, 96, 128])]
    pub widths: Vec<usize>,
    /// Training seeds per width
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u64, 2, 3])]
    pub seeds: Vec<u64>,
    /// Epoch budget per run
    #[arg(long, default_value_t = 4000)]
    pub epochs: u32,
    /// Modulus
    #[arg(long, default_value_t = 59)]
    pub p: u32,
    /// Concurrent training processes
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Bootstrap resamples
    #[arg(long, default_value_t = 5000)]
    pub resamples: usize,
    /// CCDF window in epochs around each grokking epoch
    #[arg(long, default_value_t = 500)]
    pub window: u32,
}

pub fn run(args: ReproArgs) -> Result<()> {
    fs::create_dir_all(&args.out)?;
    let runs_root = args.out.join("runs");
    let analysis_dir = args.out.join("analysis");

    println!("== stage 1: canonical ModAdd-{} sweep ==", args.p);
    let spec = sweep::SweepSpec {
        task: "modadd".into(),
        p_values: vec![args.p],
        hidden_widths: vec![],
        d_models: args.widths.clone(),
        seeds: args.seeds.clone(),
        alphas: vec![],
        percentiles: vec![],
        probe_mode: Some("shadow".into()),
        max_epochs: Some(args.epochs),
        batch_size: None,
        lr: None,
        weight_decay: None,
        eval_every: None,
        snapshots: false,
    };
    let spec_path = args.out.join("sweep_spec.json");
    fs::write(&spec_path, serde_json::to_string_pretty(&spec)?)?;
    sweep::run(sweep::SweepArgs {
        spec: spec_path,
        out: Some(runs_root.clone()),
        workers: args.workers,
        help_spec: false,
    })?;

    let run_dirs: Vec<PathBuf> = fs::read_dir(&runs_root)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();

    let io = || analyze::CommonIo { runs: run_dirs.clone(), out: analysis_dir.clone() };
    let bins = || analyze::BinArgs { bins: 41, t_min: -1.0, t_max: 1.0 };

    println!("== stage 2: time-resolved FSS ==");
    analyze::run(analyze::AnalyzeCmd::Fss(analyze::FssArgs { io: io(), bins: bins() }))?;

    println!("== stage 3: bootstrap phase split ==");
    analyze::run(analyze::AnalyzeCmd::Bootstrap(analyze::BootstrapArgs {
        io: io(),
        resamples: args.resamples,
        boot_seed: 42,
    }))?;

    println!("== stage 4: leave-one-scale-out ==");
    match analyze::run(analyze::AnalyzeCmd::Loo(analyze::LooArgs { io: io() })) {
        Ok(()) => {}
        Err(e) => println!("loo skipped: {e}"),
    }

    println!("== stage 5: CCDF cutoff scaling and collapse ==");
    analyze::run(analyze::AnalyzeCmd::Ccdf(analyze::CcdfArgs {
        io: io(),
        window: args.window,
        cutoff_percentile: 95.0,
        min_epochs: 50,
    }))?;

    println!("== stage 6: crossing detection ==");
    analyze::run(analyze::AnalyzeCmd::Crossing(analyze::CrossingArgs {
        io: io(),
        bins: bins(),
        window: 0.5,
    }))?;

    println!("repro complete; outputs under {}", args.out.display());
    Ok(())
}
