//! Bootstrap and leave-one-scale-out controls for the phase-split exponent.
//!
//! The resampling unit is one (seed, epoch) sample within its scale and
//! phase, drawn with replacement, preserving the scale design of the fit.
//! The split is strict at t = 0: pre-grokking means t < 0; the grokking
//! epoch itself (t = 0) belongs to the post phase.

use super::{fit_power_law, AnalysisError, Observable, ScaleRuns};
use crate::seeds;
use crate::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pre,
    Post,
    Synth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub phase: Phase,
    pub mean_d: f64,
    pub std_d: f64,
    /// Resamples that produced a valid fit.
    pub n_resamples: usize,
    pub histogram: Vec<HistogramBin>,
}

/// Bootstrap summaries per phase; a phase with no usable data is absent.
#[derive(Debug, Clone)]
pub struct PhaseSplit {
    pub pre: Option<BootstrapSummary>,
    pub post: Option<BootstrapSummary>,
}

/// Per-scale sample pools for one phase.
fn phase_samples(scales: &[ScaleRuns], obs: Observable, pre: bool) -> Vec<(u64, Vec<f64>)> {
    scales
        .iter()
        .map(|scale| {
            let values: Vec<f64> = scale
                .runs
                .iter()
                .flat_map(|run| run.samples.iter())
                .filter(|s| if pre { s.t < 0.0 } else { s.t >= 0.0 })
                .map(|s| obs.extract(&s.stats))
                .collect();
            (scale.n_params, values)
        })
        .collect()
}

fn plugin_fit(pools: &[(u64, Vec<f64>)]) -> Result<super::ScalingFit, AnalysisError> {
    let points: Vec<(f64, f64)> = pools
        .iter()
        .filter_map(|(n, values)| {
            stats::geometric_mean_positive(values).map(|gm| (*n as f64, gm))
        })
        .collect();
    fit_power_law(&points)
}

fn bootstrap_one_phase(
    pools: &[(u64, Vec<f64>)],
    phase: Phase,
    n_resamples: usize,
    seed: u64,
    phase_tag: u64,
) -> Option<BootstrapSummary> {
    let usable: Vec<&(u64, Vec<f64>)> =
        pools.iter().filter(|(_, v)| v.iter().any(|&x| x > 0.0)).collect();
    if usable.len() < 3 {
        return None;
    }

    let exponents: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive2(
                seed,
                seeds::STREAM_BOOTSTRAP,
                (i as u64) << 1 | phase_tag,
            ));
            let points: Vec<(f64, f64)> = usable
                .iter()
                .filter_map(|(n, values)| {
                    let resampled: Vec<f64> =
                        (0..values.len()).map(|_| values[rng.gen_range(0..values.len())]).collect();
                    stats::geometric_mean_positive(&resampled).map(|gm| (*n as f64, gm))
                })
                .collect();
            fit_power_law(&points).ok().map(|f| f.exponent)
        })
        .collect();

    if exponents.is_empty() {
        return None;
    }
    let mean_d = stats::mean(&exponents);
    let std_d = if exponents.len() > 1 { stats::sample_std(&exponents) } else { 0.0 };
    Some(BootstrapSummary {
        phase,
        mean_d,
        std_d,
        n_resamples: exponents.len(),
        histogram: histogram(&exponents, 30),
    })
}

fn histogram(values: &[f64], n_bins: usize) -> Vec<HistogramBin> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min.is_finite() && max.is_finite()) || min == max {
        return vec![HistogramBin { center: min, count: values.len() as u64 }];
    }
    let width = (max - min) / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin { center: min + (i as f64 + 0.5) * width, count })
        .collect()
}

/// Bootstrap the phase-split exponent D over (seed, epoch) resamples.
/// Deterministic given `seed`: every resample index has its own stream.
pub fn bootstrap_phase_split(
    scales: &[ScaleRuns],
    obs: Observable,
    n_resamples: usize,
    seed: u64,
) -> Result<PhaseSplit, AnalysisError> {
    if scales.len() < 3 {
        return Err(AnalysisError::InsufficientData {
            what: "scales",
            needed: 3,
            got: scales.len(),
        });
    }
    let pre_pools = phase_samples(scales, obs, true);
    let post_pools = phase_samples(scales, obs, false);
    let pre = bootstrap_one_phase(&pre_pools, Phase::Pre, n_resamples, seed, 0);
    let post = bootstrap_one_phase(&post_pools, Phase::Post, n_resamples, seed, 1);
    if pre.is_none() && post.is_none() {
        return Err(AnalysisError::InsufficientData { what: "phases with data", needed: 1, got: 0 });
    }
    Ok(PhaseSplit { pre, post })
}

/// One leave-one-scale-out refit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LooRow {
    pub omitted_n: u64,
    pub d_pre: f64,
    pub d_post: f64,
}

/// Refit both phases with each scale removed in turn (plug-in fits, no
/// resampling). Requires at least 4 scales so 3 remain per refit.
pub fn leave_one_scale_out(
    scales: &[ScaleRuns],
    obs: Observable,
) -> Result<Vec<LooRow>, AnalysisError> {
    if scales.len() < 4 {
        return Err(AnalysisError::InsufficientData {
            what: "scales",
            needed: 4,
            got: scales.len(),
        });
    }
    let pre_pools = phase_samples(scales, obs, true);
    let post_pools = phase_samples(scales, obs, false);
    let mut rows = Vec::with_capacity(scales.len());
    for omit in 0..scales.len() {
        let keep = |pools: &[(u64, Vec<f64>)]| -> Vec<(u64, Vec<f64>)> {
            pools
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != omit)
                .map(|(_, p)| p.clone())
                .collect()
        };
        let d_pre = plugin_fit(&keep(&pre_pools))?.exponent;
        let d_post = plugin_fit(&keep(&post_pools))?.exponent;
        rows.push(LooRow { omitted_n: scales[omit].n_params, d_pre, d_post });
    }
    Ok(rows)
}
