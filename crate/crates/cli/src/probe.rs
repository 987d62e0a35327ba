//! The `probe` subcommand: run the cascade diagnostic over stored gradient
//! snapshots: either a run produced by this toolkit or a directory of
//! externally produced snapshot files.

use anyhow::{bail, Context, Result};
use clap::Args;
use std::path::PathBuf;
use tduofc::cascade::{self, ProbeConfig};
use tduofc::graph::ParamGraph;
use tduofc::store::{self, AvalancheRecord, IngestStub, RecordWriter};

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// Run directory (toolkit-produced) or snapshot directory (with --ingest)
    #[arg(long)]
    pub dir: PathBuf,
    /// Treat --dir as a directory of external .tdug snapshots and write a
    /// manifest stub for it
    #[arg(long, default_value_t = false)]
    pub ingest: bool,
    /// Run id for ingested data
    #[arg(long)]
    pub run_id: Option<String>,
    /// Grokking epoch for ingested data, if known (enables aligned analyses)
    #[arg(long)]
    pub grok_epoch: Option<u32>,
    /// Override the substrate build seed (default: from the manifest)
    #[arg(long)]
    pub graph_seed: Option<u64>,

    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, default_value_t = 90.0)]
    pub percentile: f64,
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
}

pub fn run(args: ProbeArgs) -> Result<()> {
    let cfg = ProbeConfig {
        alpha: args.alpha,
        threshold_percentile: args.percentile,
        max_iterations: args.max_iter,
    };
    cfg.validate()?;

    let (manifest, snapshot_paths) = if args.ingest {
        let run_id = args
            .run_id
            .clone()
            .unwrap_or_else(|| args.dir.file_name().unwrap().to_string_lossy().into_owned());
        let stub = IngestStub { run_id, grok_epoch: args.grok_epoch };
        let (manifest, snaps) = store::ingest_external_snapshots(&args.dir, &stub)?;
        store::write_manifest(&args.dir, &manifest)?;
        println!("ingested {} snapshots, N = {}", snaps.files.len(), snaps.n_params);
        (manifest, snaps.files.into_iter().map(|(_, p)| p).collect::<Vec<_>>())
    } else {
        let manifest = store::read_manifest(&args.dir)
            .with_context(|| format!("reading manifest in {}", args.dir.display()))?;
        if manifest.snapshot_paths.is_empty() {
            bail!(
                "run {} stores no gradient snapshots; re-train with --snapshots \
                 or probe an ingested directory",
                manifest.run_id
            );
        }
        let paths =
            manifest.snapshot_paths.iter().map(|rel| args.dir.join(rel)).collect::<Vec<_>>();
        (manifest, paths)
    };

    let graph_seed = args.graph_seed.unwrap_or(manifest.graph_seed);
    let graph = ParamGraph::build_ba(manifest.n_params as usize, manifest.attach_m, graph_seed)?;
    println!(
        "substrate: N={} attach_m={} seed={} digest={:016x}",
        manifest.n_params,
        manifest.attach_m,
        graph_seed,
        graph.digest()
    );

    let out_name = format!("avalanches_{:016x}.tsv", cfg.digest());
    let out_path = args.dir.join(&out_name);
    let mut writer = RecordWriter::create(&out_path)?;
    let mut n = 0usize;
    for path in &snapshot_paths {
        let snap = store::read_snapshot(path)?;
        if snap.values.len() as u64 != manifest.n_params {
            bail!(
                "{}: snapshot N={} does not match manifest N={}",
                path.display(),
                snap.values.len(),
                manifest.n_params
            );
        }
        let grad: Vec<f64> = snap.values.iter().map(|&v| v as f64).collect();
        let tau = cascade::compute_threshold(&grad, cfg.threshold_percentile)?;
        let result = cascade::run_cascade(&grad, &graph, &cfg, tau)?;
        writer.append(&AvalancheRecord {
            run_id: manifest.run_id.clone(),
            epoch: snap.epoch,
            batch: snap.batch,
            size: result.size,
            iterations: result.iterations_used,
            truncated: result.truncated,
            rotation_cos: result.rotation_cos,
        })?;
        n += 1;
    }
    writer.finish()?;
    println!("probed {n} snapshots -> {}", out_path.display());
    Ok(())
}
