//! The thresholded-diffusion avalanche probe.
//!
//! A gradient vector is injected as the initial condition of an OFC-style
//! redistribution process on the parameter graph: every node whose value
//! exceeds the threshold in magnitude fires, keeping (1 - alpha) of its
//! value and passing alpha in equal shares to its graph neighbors. Firing
//! is synchronous: all updates within one iteration are computed from the
//! pre-iteration state and applied at once, so the result does not depend
//! on node ordering. The avalanche size is the total number of firing
//! events across all iterations.
//!
//! The probe is offline: the input gradient is never modified.

use crate::graph::ParamGraph;
use crate::stats::percentile_sorted;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("empty gradient vector")]
    EmptyInput,
    #[error("non-finite gradient entry at index {0}")]
    NonFinite(usize),
    #[error("gradient length {got} does not match graph size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("percentile must lie strictly between 0 and 100, got {0}")]
    InvalidPercentile(f64),
    #[error("invalid probe config: {0}")]
    InvalidConfig(String),
    #[error("angle undefined: a vector has zero norm")]
    UndefinedAngle,
}

/// Probe parameters. Defaults follow the canonical setting: alpha 0.3,
/// threshold at the 90th percentile of |g|, at most 20 iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub alpha: f64,
    pub threshold_percentile: f64,
    pub max_iterations: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { alpha: 0.3, threshold_percentile: 90.0, max_iterations: 20 }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<(), CascadeError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CascadeError::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.threshold_percentile > 0.0 && self.threshold_percentile < 100.0) {
            return Err(CascadeError::InvalidConfig(format!(
                "threshold_percentile must lie in (0,100), got {}",
                self.threshold_percentile
            )));
        }
        if self.max_iterations == 0 {
            return Err(CascadeError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    /// Short hex digest of the probe parameters, used to suffix record files
    /// produced by re-probing with non-default settings.
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut mix = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        mix(self.alpha.to_bits());
        mix(self.threshold_percentile.to_bits());
        mix(self.max_iterations as u64);
        h
    }
}

/// Outcome of one cascade (one training batch).
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    /// Total number of firing events across all iterations.
    pub size: u64,
    pub iterations_used: u32,
    /// True when the iteration cap was reached with active nodes remaining.
    pub truncated: bool,
    /// Post-cascade state, same length as the input gradient.
    pub final_state: Vec<f64>,
    /// Cosine between input gradient and final state; 1.0 by convention
    /// when the angle is undefined (size-0 cascades, zero vectors).
    pub rotation_cos: f64,
    pub rotation_deg: f64,
}

/// Threshold tau: percentile of |g| by linear interpolation between order
/// statistics. Computed once per batch from the raw collected gradient.
pub fn compute_threshold(grad: &[f64], percentile: f64) -> Result<f64, CascadeError> {
    if grad.is_empty() {
        return Err(CascadeError::EmptyInput);
    }
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(CascadeError::InvalidPercentile(percentile));
    }
    let mut mags = Vec::with_capacity(grad.len());
    for (i, &g) in grad.iter().enumerate() {
        if !g.is_finite() {
            return Err(CascadeError::NonFinite(i));
        }
        mags.push(g.abs());
    }
    mags.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(percentile_sorted(&mags, percentile))
}

/// Run one cascade on a copy of `grad` with a fixed threshold `tau`.
///
/// Per iteration: the active set is every node with |w_i| > tau (strict);
/// each active node i contributes -alpha*w_i to itself and +alpha*w_i/k_i
/// to each neighbor, all from the pre-iteration state. The signed total is
/// conserved exactly per firing, up to floating accumulation.
///
/// Only nodes touched in the previous iteration (fired nodes and their
/// neighbors) can change activity, so later iterations scan just that
/// candidate set; the arithmetic is identical to a full scan.
pub fn run_cascade(
    grad: &[f64],
    graph: &ParamGraph,
    cfg: &ProbeConfig,
    tau: f64,
) -> Result<CascadeResult, CascadeError> {
    cfg.validate()?;
    let n = graph.n_nodes();
    if grad.len() != n {
        return Err(CascadeError::DimensionMismatch { expected: n, got: grad.len() });
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(CascadeError::NonFinite(i));
    }
    if tau < 0.0 {
        return Err(CascadeError::InvalidConfig(format!("tau must be >= 0, got {tau}")));
    }

    let mut w = grad.to_vec();
    let mut delta = vec![0.0f64; n];
    let mut candidates: Vec<u32> = (0..n as u32).collect();
    let mut active: Vec<u32> = Vec::new();
    let mut touched: Vec<u32> = Vec::new();

    let mut size = 0u64;
    let mut iterations_used = 0u32;
    let mut truncated = false;

    for iter in 0..cfg.max_iterations {
        active.clear();
        for &i in &candidates {
            if w[i as usize].abs() > tau {
                active.push(i);
            }
        }
        if active.is_empty() {
            break;
        }
        size += active.len() as u64;
        iterations_used += 1;

        touched.clear();
        for &i in &active {
            let iu = i as usize;
            let out = cfg.alpha * w[iu];
            delta[iu] -= out;
            touched.push(i);
            let share = out / graph.degree(iu) as f64;
            for &j in graph.neighbors(iu) {
                delta[j as usize] += share;
                touched.push(j);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for &t in &touched {
            let tu = t as usize;
            w[tu] += delta[tu];
            delta[tu] = 0.0;
        }

        if iter + 1 == cfg.max_iterations {
            // Cap reached; truncated if anything is still above threshold.
            truncated = touched.iter().any(|&t| w[t as usize].abs() > tau);
        } else {
            std::mem::swap(&mut candidates, &mut touched);
        }
    }

    let (rotation_cos, rotation_deg) = if size == 0 {
        (1.0, 0.0)
    } else {
        match measure_rotation(grad, &w) {
            Ok(pair) => pair,
            Err(CascadeError::UndefinedAngle) => (1.0, 0.0),
            Err(e) => return Err(e),
        }
    };

    Ok(CascadeResult { size, iterations_used, truncated, final_state: w, rotation_cos, rotation_deg })
}

/// Cosine and angle in degrees between two vectors.
pub fn measure_rotation(a: &[f64], b: &[f64]) -> Result<(f64, f64), CascadeError> {
    if a.len() != b.len() {
        return Err(CascadeError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b.iter()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(CascadeError::UndefinedAngle);
    }
    let cos = (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0);
    Ok((cos, cos.acos().to_degrees()))
}
