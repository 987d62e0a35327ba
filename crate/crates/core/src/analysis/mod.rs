//! Statistics downstream of avalanche records: epoch aggregation, the
//! grokking-aligned time coordinate, time-resolved finite-size scaling,
//! bootstrap and leave-one-scale-out controls, CCDF cutoff scaling with
//! data collapse, shadow-probe deltas and crossing detection.
//!
//! Everything here is a pure function over immutable record sets: identical
//! inputs give identical outputs, and bootstrap randomness comes from
//! per-resample-index streams.

mod bootstrap;
mod ccdf;
mod crossing;
mod fit;

pub use bootstrap::{
    bootstrap_phase_split, leave_one_scale_out, BootstrapSummary, HistogramBin, LooRow, Phase,
    PhaseSplit,
};
pub use ccdf::{ccdf_and_cutoff, ccdf_curves, CcdfCurve, CutoffAnalysis};
pub use crossing::{
    crossing_detector, early_warning_classify, CrossingDirection, CrossingReport,
    EarlyWarningCohort, EarlyWarningReport, EarlyWarningRow,
};
pub use fit::{fit_power_law, ScalingFit};

use crate::stats;
use crate::store::AvalancheRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} {what}, got {got}")]
    InsufficientData { what: &'static str, needed: usize, got: usize },
    #[error("cannot fit: all points share one scale value")]
    DegenerateScales,
    #[error("data integrity: {0}")]
    DataIntegrity(String),
    #[error("scale N={n_params}: {got} in-window epochs, need >= {needed}")]
    InsufficientWindow { n_params: u64, got: usize, needed: usize },
    #[error("bin grids share no centers inside the window")]
    BinGridMismatch,
    #[error("grokking epoch must be >= 1, got {0}")]
    InvalidGrokEpoch(u32),
}

// ---------------------------------------------------------------------------
// Epoch aggregation
// ---------------------------------------------------------------------------

/// Per-epoch coarse-graining of the per-batch avalanche sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub run_id: String,
    pub epoch: u32,
    /// Largest per-batch avalanche in the epoch.
    pub s_max: u64,
    /// Mean per-batch avalanche size.
    pub s_avg: f64,
    /// Sum of avalanche sizes over the epoch's batches.
    pub s_epoch: u64,
    pub n_batches: usize,
    pub truncation_rate: f64,
}

/// Coarse-grain one run's batch records into per-epoch statistics.
/// Epochs with no records are absent from the output.
pub fn aggregate_epochs(records: &[AvalancheRecord]) -> Result<Vec<EpochStats>, AnalysisError> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let run_id = &records[0].run_id;
    let mut seen = std::collections::HashSet::with_capacity(records.len());
    let mut by_epoch: BTreeMap<u32, Vec<&AvalancheRecord>> = BTreeMap::new();
    for rec in records {
        if rec.run_id != *run_id {
            return Err(AnalysisError::DataIntegrity(format!(
                "records mix runs {run_id} and {}",
                rec.run_id
            )));
        }
        if !seen.insert((rec.epoch, rec.batch)) {
            return Err(AnalysisError::DataIntegrity(format!(
                "duplicate (epoch, batch) key ({}, {})",
                rec.epoch, rec.batch
            )));
        }
        by_epoch.entry(rec.epoch).or_default().push(rec);
    }
    Ok(by_epoch
        .into_iter()
        .map(|(epoch, recs)| {
            let n_batches = recs.len();
            let s_epoch: u64 = recs.iter().map(|r| r.size).sum();
            let s_max = recs.iter().map(|r| r.size).max().unwrap_or(0);
            let truncated = recs.iter().filter(|r| r.truncated).count();
            EpochStats {
                run_id: run_id.clone(),
                epoch,
                s_max,
                s_avg: s_epoch as f64 / n_batches as f64,
                s_epoch,
                n_batches,
                truncation_rate: truncated as f64 / n_batches as f64,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Grokking alignment
// ---------------------------------------------------------------------------

/// Which epoch observable feeds the scaling fits. `SMax` gives D(t), the
/// primary diagnostic; `SAvg` gives gamma(t), reported alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    SMax,
    SAvg,
}

impl Observable {
    pub fn extract(&self, stats: &EpochStats) -> f64 {
        match self {
            Observable::SMax => stats.s_max as f64,
            Observable::SAvg => stats.s_avg,
        }
    }
}

/// One epoch placed on the relative-time axis t = (epoch - g) / g.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedEpoch {
    pub t: f64,
    pub stats: EpochStats,
}

/// A grokked run's epoch statistics in relative time.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedRun {
    pub run_id: String,
    pub samples: Vec<AlignedEpoch>,
}

impl AlignedRun {
    /// Projection to a (t, value) series for one observable.
    pub fn series(&self, obs: Observable) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, obs.extract(&s.stats))).collect()
    }
}

/// Map epochs to relative time; defined only for grokked runs (g >= 1).
/// t = -1 at epoch 0 and t = 0 exactly at the grokking epoch.
pub fn align_to_grokking(stats: &[EpochStats], g: u32) -> Result<AlignedRun, AnalysisError> {
    if g < 1 {
        return Err(AnalysisError::InvalidGrokEpoch(g));
    }
    let run_id = stats.first().map(|s| s.run_id.clone()).unwrap_or_default();
    Ok(AlignedRun {
        run_id,
        samples: stats
            .iter()
            .map(|s| AlignedEpoch {
                t: (s.epoch as f64 - g as f64) / g as f64,
                stats: s.clone(),
            })
            .collect(),
    })
}

/// All aligned runs sharing one model scale N (seeds pooled).
#[derive(Debug, Clone)]
pub struct ScaleRuns {
    pub n_params: u64,
    pub runs: Vec<AlignedRun>,
}

/// A run with its grokking epoch still in absolute time, for the
/// window-based distributional analyses.
#[derive(Debug, Clone)]
pub struct GrokkedRun {
    pub g: u32,
    pub stats: Vec<EpochStats>,
}

/// All grokked runs sharing one model scale N.
#[derive(Debug, Clone)]
pub struct ScalePool {
    pub n_params: u64,
    pub runs: Vec<GrokkedRun>,
}

// ---------------------------------------------------------------------------
// Time-resolved FSS
// ---------------------------------------------------------------------------

/// Uniform binning of relative time. 41 bins on [-1, 1] by default; values
/// outside the range fall into overflow bins continuing the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_bins: usize,
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec { t_min: -1.0, t_max: 1.0, n_bins: 41 }
    }
}

impl BinSpec {
    pub fn width(&self) -> f64 {
        (self.t_max - self.t_min) / self.n_bins as f64
    }

    fn index(&self, t: f64) -> i64 {
        ((t - self.t_min) / self.width()).floor() as i64
    }

    pub fn center(&self, index: i64) -> f64 {
        self.t_min + (index as f64 + 0.5) * self.width()
    }
}

/// Fit of one relative-time bin; `fit` is `None` when fewer than 3 scales
/// contributed (an explicit gap, never interpolated).
#[derive(Debug, Clone)]
pub struct TimeBinFit {
    pub t_center: f64,
    pub n_scales: usize,
    pub fit: Option<ScalingFit>,
}

/// Time-resolved finite-size scaling: per bin, aggregate the observable per
/// scale by geometric mean (the fit lives in log space) and regress across
/// scales. Emits every bin from the first to the last populated one, with
/// gaps explicit.
pub fn fss_over_time(
    scales: &[ScaleRuns],
    bins: &BinSpec,
    obs: Observable,
) -> Result<Vec<TimeBinFit>, AnalysisError> {
    if scales.len() < 3 {
        return Err(AnalysisError::InsufficientData {
            what: "scales",
            needed: 3,
            got: scales.len(),
        });
    }
    let mut per_bin: BTreeMap<i64, Vec<Vec<f64>>> = BTreeMap::new();
    for (scale_idx, scale) in scales.iter().enumerate() {
        for run in &scale.runs {
            for sample in &run.samples {
                let idx = bins.index(sample.t);
                per_bin
                    .entry(idx)
                    .or_insert_with(|| vec![Vec::new(); scales.len()])[scale_idx]
                    .push(obs.extract(&sample.stats));
            }
        }
    }
    let Some((&first, _)) = per_bin.iter().next() else {
        return Ok(Vec::new());
    };
    let &last = per_bin.keys().last().unwrap();

    let mut out = Vec::new();
    for idx in first..=last {
        let t_center = bins.center(idx);
        let fit = per_bin.get(&idx).map(|buckets| {
            let points: Vec<(f64, f64)> = buckets
                .iter()
                .enumerate()
                .filter_map(|(scale_idx, values)| {
                    stats::geometric_mean_positive(values)
                        .map(|gm| (scales[scale_idx].n_params as f64, gm))
                })
                .collect();
            (points.len(), points)
        });
        match fit {
            Some((n_scales, points)) if n_scales >= 3 => {
                let fitted = fit_power_law(&points).ok();
                out.push(TimeBinFit { t_center, n_scales, fit: fitted });
            }
            Some((n_scales, _)) => out.push(TimeBinFit { t_center, n_scales, fit: None }),
            None => out.push(TimeBinFit { t_center, n_scales: 0, fit: None }),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Shadow-probe delta
// ---------------------------------------------------------------------------

/// Pointwise D_shadow - D_on on shared populated bins.
#[derive(Debug, Clone)]
pub struct ShadowDelta {
    /// (t_center, d_shadow, d_on, delta)
    pub points: Vec<(f64, f64, f64, f64)>,
    pub max_abs: f64,
}

/// Compare shadow and probe-on D(t) series inside |t| <= window.
/// The two series must share bin centers; disjoint grids are an error.
pub fn shadow_delta(
    shadow: &[TimeBinFit],
    on: &[TimeBinFit],
    window: f64,
) -> Result<ShadowDelta, AnalysisError> {
    let centers_match = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let mut any_shared_center = false;
    let mut points = Vec::new();
    for s in shadow.iter().filter(|b| b.t_center.abs() <= window + 1e-12) {
        for o in on.iter().filter(|b| centers_match(b.t_center, s.t_center)) {
            any_shared_center = true;
            if let (Some(fs), Some(fo)) = (&s.fit, &o.fit) {
                points.push((s.t_center, fs.exponent, fo.exponent, fs.exponent - fo.exponent));
            }
        }
    }
    if !any_shared_center {
        return Err(AnalysisError::BinGridMismatch);
    }
    if points.is_empty() {
        return Err(AnalysisError::InsufficientData { what: "shared populated bins", needed: 1, got: 0 });
    }
    let max_abs = points.iter().map(|p| p.3.abs()).fold(0.0f64, f64::max);
    Ok(ShadowDelta { points, max_abs })
}

/// Observable value of a run at one absolute epoch, if recorded.
pub fn observable_at_epoch(stats: &[EpochStats], epoch: u32, obs: Observable) -> Option<f64> {
    stats.iter().find(|s| s.epoch == epoch).map(|s| obs.extract(s))
}

/// Fit across scales at a fixed absolute epoch: values pooled per scale are
/// aggregated by geometric mean before the log-log regression.
pub fn fit_at_epoch(scale_values: &[(u64, Vec<f64>)]) -> Result<ScalingFit, AnalysisError> {
    let points: Vec<(f64, f64)> = scale_values
        .iter()
        .filter_map(|(n, values)| {
            stats::geometric_mean_positive(values).map(|gm| (*n as f64, gm))
        })
        .collect();
    fit_power_law(&points)
}
