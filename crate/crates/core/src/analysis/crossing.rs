//! Crossing detection on D(t) series and the early-warning classifier.

use super::{fit_power_law, AnalysisError, TimeBinFit};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDirection {
    Descending,
    Ascending,
    None,
}

/// Outcome of scanning a D(t) series for a D = 1 crossing inside the
/// critical window. Absence of a crossing is a valid result (the ungrokked
/// signature is a persistently supercritical series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub t_cross: Option<f64>,
    pub direction: CrossingDirection,
    /// (exponent, stderr) of the bin containing t = 0, when populated.
    pub d_at_zero: Option<(f64, f64)>,
    /// Half window in t used for the scan.
    pub window: f64,
}

/// Locate the first sign change of (D - 1) within |t| <= window by linear
/// interpolation between populated bin centers.
pub fn crossing_detector(series: &[TimeBinFit], window: f64) -> CrossingReport {
    let populated: Vec<(f64, f64, f64)> = series
        .iter()
        .filter(|b| b.t_center.abs() <= window + 1e-12)
        .filter_map(|b| b.fit.as_ref().map(|f| (b.t_center, f.exponent, f.stderr)))
        .collect();

    // the bin containing t = 0: within half a grid step of zero
    let half_step = grid_half_step(series).unwrap_or(window);
    let d_at_zero = populated
        .iter()
        .filter(|(t, _, _)| t.abs() <= half_step + 1e-12)
        .min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap())
        .map(|&(_, d, se)| (d, se));

    let mut t_cross = None;
    let mut direction = CrossingDirection::None;
    for pair in populated.windows(2) {
        let (t_a, d_a, _) = pair[0];
        let (t_b, d_b, _) = pair[1];
        let f_a = d_a - 1.0;
        let f_b = d_b - 1.0;
        if f_a == 0.0 {
            t_cross = Some(t_a);
            direction =
                if f_b > 0.0 { CrossingDirection::Ascending } else { CrossingDirection::Descending };
            break;
        }
        if f_a * f_b < 0.0 {
            t_cross = Some(t_a + f_a / (f_a - f_b) * (t_b - t_a));
            direction =
                if f_a > 0.0 { CrossingDirection::Descending } else { CrossingDirection::Ascending };
            break;
        }
    }
    CrossingReport { t_cross, direction, d_at_zero, window }
}

fn grid_half_step(series: &[TimeBinFit]) -> Option<f64> {
    let mut min_step = f64::INFINITY;
    for pair in series.windows(2) {
        let step = pair[1].t_center - pair[0].t_center;
        if step > 0.0 && step < min_step {
            min_step = step;
        }
    }
    min_step.is_finite().then_some(min_step / 2.0)
}

// ---------------------------------------------------------------------------
// Early warning
// ---------------------------------------------------------------------------

/// One classification unit: a seed-matched set of runs spanning the scale
/// axis, with the observable collected at the probe epoch. The realized
/// outcome is whether the member runs grokked.
#[derive(Debug, Clone)]
pub struct EarlyWarningCohort {
    pub id: String,
    pub realized_grokked: bool,
    /// (N, pooled observable at the probe epoch) per scale.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarlyWarningRow {
    pub id: String,
    pub d: f64,
    pub r_squared: f64,
    /// Fit quality gate (R^2 >= min) passed; gated-out rows are excluded
    /// from the confusion counts.
    pub quality_ok: bool,
    pub predicted_will_grok: bool,
    pub realized_grokked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarlyWarningReport {
    pub threshold_d: f64,
    pub min_r_squared: f64,
    pub rows: Vec<EarlyWarningRow>,
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
    /// Accuracy over quality-gated rows; absent when none pass the gate.
    pub accuracy: Option<f64>,
}

/// Predict will-grok iff the cohort's D at the probe epoch is at or below
/// the threshold, then score predictions against realized outcomes.
pub fn early_warning_classify(
    cohorts: &[EarlyWarningCohort],
    threshold_d: f64,
    min_r_squared: f64,
) -> Result<EarlyWarningReport, AnalysisError> {
    if cohorts.is_empty() {
        return Err(AnalysisError::InsufficientData { what: "cohorts", needed: 1, got: 0 });
    }
    let mut rows = Vec::with_capacity(cohorts.len());
    let (mut tp, mut fp, mut tn, mut fal_n) = (0usize, 0usize, 0usize, 0usize);
    for cohort in cohorts {
        let fit = fit_power_law(&cohort.points)?;
        let quality_ok = fit.r_squared >= min_r_squared;
        let predicted = fit.exponent <= threshold_d;
        if quality_ok {
            match (predicted, cohort.realized_grokked) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fal_n += 1,
            }
        }
        rows.push(EarlyWarningRow {
            id: cohort.id.clone(),
            d: fit.exponent,
            r_squared: fit.r_squared,
            quality_ok,
            predicted_will_grok: predicted,
            realized_grokked: cohort.realized_grokked,
        });
    }
    let gated = tp + fp + tn + fal_n;
    let accuracy = (gated > 0).then(|| (tp + tn) as f64 / gated as f64);
    Ok(EarlyWarningReport {
        threshold_d,
        min_r_squared,
        rows,
        true_pos: tp,
        false_pos: fp,
        true_neg: tn,
        false_neg: fal_n,
        accuracy,
    })
}
