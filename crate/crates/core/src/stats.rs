//! Small numeric helpers shared across the probe and the analyses.

/// Percentile by linear interpolation between order statistics.
///
/// Uses the rank convention r = 1 + q/100 * (n - 1) on the sorted data,
/// interpolating linearly between the two bracketing order statistics.
/// This single convention is shared by the cascade threshold and the
/// CCDF cutoff so exponents computed from either agree.
///
/// `sorted` must be ascending; q must lie in (0, 100).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!(q > 0.0 && q < 100.0);
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q / 100.0 * (n as f64 - 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Arithmetic mean; NaN on empty input.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); NaN below two samples.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Geometric mean of the strictly positive entries; `None` if there are none.
///
/// Zeros are legitimate in avalanche data (quiet epochs) but carry no
/// information for a log-space fit, so they are skipped rather than
/// collapsing the mean to zero.
pub fn geometric_mean_positive(values: &[f64]) -> Option<f64> {
    let mut log_sum = 0.0;
    let mut count = 0usize;
    for &v in values {
        if v > 0.0 {
            log_sum += v.ln();
            count += 1;
        }
    }
    if count == 0 {
        None
    } else {
        Some((log_sum / count as f64).exp())
    }
}

/// Two-sample Kolmogorov–Smirnov distance: sup |F_a(x) - F_b(x)| over the
/// pooled support, from the raw samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xb.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d_max = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        let d = (i as f64 / na - j as f64 / nb).abs();
        if d > d_max {
            d_max = d;
        }
    }
    d_max
}
