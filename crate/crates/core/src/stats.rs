//! Small descriptive helpers shared by the diagnostics and the harness.

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). Panics on an empty slice.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let mu = mean(values);
    values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (values.len() - 1) as f64
}

/// Standard error of the mean.
pub fn std_error(values: &[f64]) -> f64 {
    (variance(values) / values.len() as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `p_values` and
/// the discrete uniform law on `{1/(B+1), 2/(B+1), ..., 1}`, the exact null
/// law of a randomized permutation p-value without ties.
pub fn ks_discrete_uniform(p_values: &[f64], b: usize) -> f64 {
    let atoms = (b + 1) as f64;
    let mut sorted = p_values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let len = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut below = 0usize;
    // both CDFs are step functions that only jump at the atoms k/(B+1)
    for k in 1..=(b + 1) {
        let x = k as f64 / atoms;
        while below < sorted.len() && sorted[below] <= x + 1e-12 {
            below += 1;
        }
        d = d.max((below as f64 / len - k as f64 / atoms).abs());
    }
    d
}

/// Asymptotic one-sample Kolmogorov-Smirnov critical value at level 1%.
pub fn ks_critical_1pct(len: usize) -> f64 {
    1.6276 / (len as f64).sqrt()
}
