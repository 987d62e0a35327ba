//! Log-log power-law regression.

use super::AnalysisError;
use serde::{Deserialize, Serialize};

/// Ordinary least squares of ln y on ln x. The exponent is the slope; the
/// standard error comes from the usual OLS formula with n - 2 degrees of
/// freedom. Residuals are in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub residuals: Vec<f64>,
    pub stderr: f64,
    /// Points dropped because y <= 0 carries no log-space information.
    pub n_dropped: usize,
}

impl ScalingFit {
    /// Prefactor exp(intercept) of y = c * x^exponent.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Fit y ~ x^D over (x, y) pairs. Points with y <= 0 (or x <= 0) are
/// dropped and counted; fewer than 3 surviving points is an error.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit, AnalysisError> {
    let usable: Vec<(f64, f64)> =
        points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
    let n_dropped = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(AnalysisError::InsufficientData {
            what: "positive points",
            needed: 3,
            got: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let logs: Vec<(f64, f64)> = usable.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::DegenerateScales);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let residuals: Vec<f64> =
        logs.iter().map(|&(x, y)| y - (intercept + slope * x)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = logs.iter().map(|&(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        // constant y: the flat fit is exact
        1.0
    };
    let stderr = if usable.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ScalingFit {
        exponent: slope,
        intercept,
        r_squared,
        n_points: usable.len(),
        residuals,
        stderr,
        n_dropped,
    })
}
