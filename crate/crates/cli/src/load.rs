//! Loading and grouping run directories for the analyses.

use anyhow::{bail, Context, Result};
use std::path::{Path, PathBuf};
use tduofc::analysis::{self, AlignedRun, EpochStats, GrokkedRun, ScalePool, ScaleRuns};
use tduofc::store;
use tduofc::train::{RunManifest, RunStatus};

pub struct LoadedRun {
    pub manifest: RunManifest,
    pub stats: Vec<EpochStats>,
}

/// Read manifest + avalanche records of one run directory and aggregate
/// them into epoch statistics.
pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let manifest = store::read_manifest(dir)
        .with_context(|| format!("reading manifest in {}", dir.display()))?;
    let records = store::read_avalanche_records(&dir.join(&manifest.avalanche_record_path))
        .with_context(|| format!("reading records in {}", dir.display()))?;
    let stats = analysis::aggregate_epochs(&records)?;
    Ok(LoadedRun { manifest, stats })
}

pub fn load_runs(dirs: &[PathBuf]) -> Result<Vec<LoadedRun>> {
    if dirs.is_empty() {
        bail!("no run directories given; pass them with --runs");
    }
    let mut runs = Vec::with_capacity(dirs.len());
    for dir in dirs {
        runs.push(load_run(dir)?);
    }
    Ok(runs)
}

/// Group grokked runs by scale and align them to their grokking epochs.
/// Ungrokked/failed runs are skipped with a notice (the aligned coordinate
/// is undefined for them).
pub fn to_aligned_scales(runs: &[LoadedRun]) -> Result<Vec<ScaleRuns>> {
    let mut scales: Vec<ScaleRuns> = Vec::new();
    let mut skipped = 0usize;
    for run in runs {
        let Some(g) = run.manifest.grok_epoch else {
            skipped += 1;
            continue;
        };
        let aligned: AlignedRun = analysis::align_to_grokking(&run.stats, g)?;
        match scales.iter_mut().find(|s| s.n_params == run.manifest.n_params) {
            Some(scale) => scale.runs.push(aligned),
            None => scales
                .push(ScaleRuns { n_params: run.manifest.n_params, runs: vec![aligned] }),
        }
    }
    if skipped > 0 {
        eprintln!("note: skipped {skipped} run(s) without a grokking epoch");
    }
    scales.sort_by_key(|s| s.n_params);
    if scales.is_empty() {
        bail!("no grokked runs among the inputs; aligned analyses need grokked runs");
    }
    Ok(scales)
}

/// Group grokked runs by scale keeping absolute epochs (for the CCDF window).
pub fn to_scale_pools(runs: &[LoadedRun]) -> Result<Vec<ScalePool>> {
    let mut pools: Vec<ScalePool> = Vec::new();
    for run in runs {
        let Some(g) = run.manifest.grok_epoch else { continue };
        let grokked = GrokkedRun { g, stats: run.stats.clone() };
        match pools.iter_mut().find(|s| s.n_params == run.manifest.n_params) {
            Some(pool) => pool.runs.push(grokked),
            None => pools.push(ScalePool { n_params: run.manifest.n_params, runs: vec![grokked] }),
        }
    }
    pools.sort_by_key(|s| s.n_params);
    if pools.is_empty() {
        bail!("no grokked runs among the inputs");
    }
    Ok(pools)
}

pub fn is_grokked(run: &LoadedRun) -> bool {
    run.manifest.status == RunStatus::Grokked
}
