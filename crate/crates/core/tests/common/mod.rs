//! Shared independent reference implementations for the integration tests.
//! These stay deliberately naive (dense adjacency, full scans, cumulative
//! linear sampling) so they cannot share a bug with the optimized paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tduofc::graph::ParamGraph;

/// Dense-form reference cascade. Per iteration: scan every node for
/// activity, accumulate redistribution deltas against a dense adjacency
/// matrix (self first, then neighbors in ascending order), then apply.
pub struct NaiveCascadeOut {
    pub size: u64,
    pub iterations: u32,
    pub truncated: bool,
    pub final_state: Vec<f64>,
}

pub fn naive_cascade(
    grad: &[f64],
    graph: &ParamGraph,
    alpha: f64,
    max_iterations: usize,
    tau: f64,
) -> NaiveCascadeOut {
    let n = graph.n_nodes();
    let mut adj = vec![vec![false; n]; n];
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for &j in graph.neighbors(i) {
            adj[i][j as usize] = true;
        }
        degree[i] = graph.degree(i);
    }

    let mut w = grad.to_vec();
    let mut size = 0u64;
    let mut iterations = 0u32;
    let mut truncated = false;
    for iter in 0..max_iterations {
        let active: Vec<usize> = (0..n).filter(|&i| w[i].abs() > tau).collect();
        if active.is_empty() {
            break;
        }
        size += active.len() as u64;
        iterations += 1;
        let mut delta = vec![0.0f64; n];
        for &i in &active {
            let out = alpha * w[i];
            delta[i] -= out;
            let share = out / degree[i] as f64;
            for (j, row) in adj[i].iter().enumerate() {
                if *row {
                    delta[j] += share;
                }
            }
        }
        for j in 0..n {
            w[j] += delta[j];
        }
        if iter + 1 == max_iterations {
            truncated = (0..n).any(|i| w[i].abs() > tau);
        }
    }
    NaiveCascadeOut { size, iterations, truncated, final_state: w }
}

/// Brute-force preferential attachment built edge-list-first: degrees are
/// sampled by a cumulative linear scan over the degree array (no urn).
pub fn naive_ba_degrees(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let m0 = m + 1;
    assert!(n >= m0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    for i in 0..m0 {
        for j in (i + 1)..m0 {
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    for t in m0..n {
        let mut picked: Vec<usize> = Vec::with_capacity(m);
        while picked.len() < m {
            let total: usize = degree[..t].iter().sum();
            let mut r = rng.gen_range(0..total);
            let mut chosen = 0usize;
            for (i, &d) in degree[..t].iter().enumerate() {
                if r < d {
                    chosen = i;
                    break;
                }
                r -= d;
            }
            if !picked.contains(&chosen) {
                picked.push(chosen);
            }
        }
        for &dst in &picked {
            degree[dst] += 1;
            degree[t] += 1;
        }
    }
    degree
}

/// Independent percentile oracle on sorted data: rank r = 1 + q/100*(n-1),
/// computed 1-indexed the way one would by hand.
pub fn percentile_oracle(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let r = 1.0 + q / 100.0 * (n as f64 - 1.0);
    let k = r.floor() as usize; // 1-indexed lower order statistic
    let frac = r - k as f64;
    if k >= n {
        sorted[n - 1]
    } else {
        sorted[k - 1] * (1.0 - frac) + sorted[k] * frac
    }
}
