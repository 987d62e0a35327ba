//! Distributional evidence: CCDF of epoch-summed avalanches, cutoff scaling
//! s_c ~ N^{D_cut}, and the data collapse under S / N^{D_cut}.

use super::{fit_power_law, AnalysisError, ScalePool, ScalingFit};
use crate::stats::percentile_sorted;
use serde::{Deserialize, Serialize};

/// Complementary CDF of one scale's pooled epoch-summed avalanche sizes:
/// points are (s, P(S >= s)) at each distinct observed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub n_params: u64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct CutoffAnalysis {
    /// 95th-percentile (by default) cutoff s_c per scale.
    pub cutoffs: Vec<(u64, f64)>,
    /// Fit of s_c ~ N^{D_cut}.
    pub fit: ScalingFit,
    pub ccdfs: Vec<CcdfCurve>,
    /// Same curves with sizes rescaled by N^{D_cut}.
    pub collapsed: Vec<CcdfCurve>,
    /// Pooled in-window epoch count per scale.
    pub n_epochs: Vec<(u64, usize)>,
}

/// CCDF curves alone, for cases with too few scales for a cutoff fit
/// (the curves are still well-defined per scale).
pub fn ccdf_curves(pools: &[ScalePool], window: u32) -> Vec<CcdfCurve> {
    pools
        .iter()
        .map(|pool| {
            let mut values: Vec<f64> = Vec::new();
            for run in &pool.runs {
                let g = run.g as i64;
                for s in &run.stats {
                    if (s.epoch as i64 - g).abs() <= window as i64 {
                        values.push(s.s_epoch as f64);
                    }
                }
            }
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            CcdfCurve { n_params: pool.n_params, points: ccdf_points(&values) }
        })
        .collect()
}

fn ccdf_points(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut i = 0usize;
    while i < sorted.len() {
        let v = sorted[i];
        // count of values >= v is everything from the first occurrence on
        points.push((v, (sorted.len() - i) as f64 / n));
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    points
}

/// Pool S_epoch within |epoch - g| <= window per scale (across seeds),
/// extract the percentile cutoff, fit the cutoff across scales, and emit
/// plot-ready CCDF and collapse curves.
///
/// Preconditions: at least 3 scales, each with at least `min_epochs`
/// in-window epochs (default expectation 50); violations name the scale.
pub fn ccdf_and_cutoff(
    pools: &[ScalePool],
    window: u32,
    cutoff_percentile: f64,
    min_epochs: usize,
) -> Result<CutoffAnalysis, AnalysisError> {
    if pools.len() < 3 {
        return Err(AnalysisError::InsufficientData {
            what: "scales",
            needed: 3,
            got: pools.len(),
        });
    }
    let mut cutoffs = Vec::with_capacity(pools.len());
    let mut ccdfs = Vec::with_capacity(pools.len());
    let mut pooled_per_scale = Vec::with_capacity(pools.len());
    let mut n_epochs = Vec::with_capacity(pools.len());

    for pool in pools {
        let mut values: Vec<f64> = Vec::new();
        for run in &pool.runs {
            let g = run.g as i64;
            for s in &run.stats {
                if (s.epoch as i64 - g).abs() <= window as i64 {
                    values.push(s.s_epoch as f64);
                }
            }
        }
        if values.len() < min_epochs {
            return Err(AnalysisError::InsufficientWindow {
                n_params: pool.n_params,
                got: values.len(),
                needed: min_epochs,
            });
        }
        n_epochs.push((pool.n_params, values.len()));
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s_c = percentile_sorted(&values, cutoff_percentile);
        cutoffs.push((pool.n_params, s_c));
        ccdfs.push(CcdfCurve { n_params: pool.n_params, points: ccdf_points(&values) });
        pooled_per_scale.push((pool.n_params, values));
    }

    let fit_points: Vec<(f64, f64)> =
        cutoffs.iter().map(|&(n, s_c)| (n as f64, s_c)).collect();
    let fit = fit_power_law(&fit_points)?;

    let collapsed = pooled_per_scale
        .iter()
        .map(|(n, values)| {
            let scale = (*n as f64).powf(fit.exponent);
            let rescaled: Vec<f64> = values.iter().map(|v| v / scale).collect();
            CcdfCurve { n_params: *n, points: ccdf_points(&rescaled) }
        })
        .collect();

    Ok(CutoffAnalysis { cutoffs, fit, ccdfs, collapsed, n_epochs })
}
