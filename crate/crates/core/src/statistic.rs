//! The projected Baringhaus-Franz statistic.
//!
//! For a direction `f`, the one-dimensional energy-type statistic compares the
//! projections `<X_j, f>` and `<Y_k, f>`. The functional statistic averages it
//! over directions drawn from the pooled empirical measure, which with a Gram
//! matrix means: take every row of the Gram matrix as a projection vector.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{GramMatrix, Labels};
use crate::error::{Error, Result};

/// The transform `phi` applied to squared projection differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiKind {
    /// `sqrt(z) / 2`
    L2,
    /// `1 - exp(-z / 2)`
    Exp,
    /// `log(1 + z)`
    Log,
}

impl PhiKind {
    pub const ALL: [PhiKind; 3] = [PhiKind::L2, PhiKind::Exp, PhiKind::Log];

    /// `phi(z)` without argument checking.
    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            PhiKind::L2 => 0.5 * z.sqrt(),
            PhiKind::Exp => -(-0.5 * z).exp_m1(),
            PhiKind::Log => z.ln_1p(),
        }
    }

    /// `phi(d^2)`; avoids the square root for the L2 variant.
    #[inline]
    pub fn of_diff(self, d: f64) -> f64 {
        match self {
            PhiKind::L2 => 0.5 * d.abs(),
            PhiKind::Exp => -(-0.5 * d * d).exp_m1(),
            PhiKind::Log => (d * d).ln_1p(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhiKind::L2 => "l2",
            PhiKind::Exp => "exp",
            PhiKind::Log => "log",
        }
    }
}

impl fmt::Display for PhiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(PhiKind::L2),
            "exp" => Ok(PhiKind::Exp),
            "log" => Ok(PhiKind::Log),
            other => Err(Error::invalid(format!(
                "unknown phi `{other}` (expected l2, exp or log)"
            ))),
        }
    }
}

/// Checked `phi(z)`; rejects negative or NaN arguments.
pub fn phi_eval(kind: PhiKind, z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::invalid(format!("phi needs z >= 0, got {z}")));
    }
    Ok(kind.eval(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    pub zeta_hat: f64,
    /// `n m / (n + m) * zeta_hat`
    pub scaled: f64,
}

impl StatisticValue {
    pub fn new(zeta_hat: f64, n: usize, m: usize) -> Self {
        StatisticValue {
            zeta_hat,
            scaled: zeta_hat * scale_factor(n, m),
        }
    }
}

/// `n m / (n + m)`
#[inline]
pub fn scale_factor(n: usize, m: usize) -> f64 {
    (n * m) as f64 / (n + m) as f64
}

/// One-dimensional statistic on projected values:
/// `2/(nm) sum_{A x B} phi - 1/n^2 sum_{A x A} phi - 1/m^2 sum_{B x B} phi`,
/// with `phi` applied to squared differences.
///
/// Every sum is taken over its terms in sorted order, so the value depends
/// only on the multisets of terms: relabeling or reordering the sample
/// (in particular exchanging the groups) gives a bit-identical result.
pub fn bf_statistic_1d(projections: &[f64], labels: &Labels, kind: PhiKind) -> Result<f64> {
    if projections.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: projections.len(),
        });
    }
    let p = projections;
    let (n, m) = (labels.n(), labels.m());
    let mut cross = Vec::with_capacity(n * m);
    let mut aa = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut bb = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for j in 0..p.len() {
        let fj = labels.is_first(j);
        for k in (j + 1)..p.len() {
            let v = kind.of_diff(p[j] - p[k]);
            match (fj, labels.is_first(k)) {
                (true, true) => aa.push(v),
                (false, false) => bb.push(v),
                _ => cross.push(v),
            }
        }
    }
    let (nf, mf) = (n as f64, m as f64);
    // within sums run over unordered pairs; the V-statistic counts both orders
    let within = 2.0 * sorted_sum(aa) / (nf * nf) + 2.0 * sorted_sum(bb) / (mf * mf);
    Ok(2.0 * sorted_sum(cross) / (nf * mf) - within)
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// The pBF estimator from a Gram matrix: each row of `gram` is the vector of
/// projections onto one pooled curve; the per-direction statistics are
/// averaged within each group and the two group averages are averaged.
pub fn pbf_statistic(gram: &GramMatrix, labels: &Labels, kind: PhiKind) -> Result<StatisticValue> {
    if gram.dim() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: gram.dim(),
            actual: labels.len(),
        });
    }
    let per_direction: Vec<f64> = (0..gram.dim())
        .into_par_iter()
        .map(|i| bf_statistic_1d(gram.row(i), labels, kind))
        .collect::<Result<_>>()?;
    let (n, m) = (labels.n(), labels.m());
    let (mut t_a, mut t_b) = (Vec::with_capacity(n), Vec::with_capacity(m));
    for (i, t) in per_direction.into_iter().enumerate() {
        if labels.is_first(i) {
            t_a.push(t);
        } else {
            t_b.push(t);
        }
    }
    let zeta = 0.5 * (sorted_sum(t_a) / n as f64 + sorted_sum(t_b) / m as f64);
    Ok(StatisticValue::new(zeta, n, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(phi_eval(PhiKind::L2, 0.25).unwrap(), 0.25);
        assert_eq!(phi_eval(PhiKind::Exp, 0.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((phi_eval(PhiKind::Log, e - 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(phi_eval(PhiKind::L2, -1e-3).is_err());
        assert!(phi_eval(PhiKind::Log, f64::NAN).is_err());
    }

    #[test]
    fn phi_zero_and_monotone() {
        for kind in PhiKind::ALL {
            assert_eq!(kind.eval(0.0), 0.0);
            assert_eq!(kind.of_diff(0.0), 0.0);
            let mut prev = 0.0;
            for k in 1..200 {
                let v = kind.eval(k as f64 * 0.37);
                assert!(v.is_finite() && v >= prev);
                prev = v;
            }
            assert!(kind.eval(1e300).is_finite());
        }
    }

    #[test]
    fn phi_parse_roundtrip() {
        for kind in PhiKind::ALL {
            assert_eq!(kind.name().parse::<PhiKind>().unwrap(), kind);
        }
        assert!("gauss".parse::<PhiKind>().is_err());
    }

    #[test]
    fn one_dimensional_hand_values() {
        let labels = Labels::from_sizes(1, 1).unwrap();
        let t = bf_statistic_1d(&[1.0, 0.5], &labels, PhiKind::L2).unwrap();
        assert!((t - 0.5).abs() < 1e-15);

        let labels = Labels::from_sizes(3, 2).unwrap();
        for kind in PhiKind::ALL {
            let t = bf_statistic_1d(&[0.7; 5], &labels, kind).unwrap();
            assert_eq!(t, 0.0);
        }
    }

    #[test]
    fn one_dimensional_equal_multisets_vanish() {
        let labels = Labels::from_sizes(4, 4).unwrap();
        let p = [0.3, -1.2, 2.5, 0.9, 2.5, 0.3, 0.9, -1.2];
        for kind in PhiKind::ALL {
            let t = bf_statistic_1d(&p, &labels, kind).unwrap();
            assert!(t.abs() < 1e-12, "{kind}: {t}");
        }
    }

    #[test]
    fn one_dimensional_is_order_invariant() {
        let labels = Labels::new(vec![true, false, false, true, true, false, true]).unwrap();
        let p = [0.1, 2.0, -0.4, 3.3, 0.1, 1.7, -2.2];
        let order = [6, 2, 0, 5, 3, 1, 4];
        let q: Vec<f64> = order.iter().map(|&i| p[i]).collect();
        let relabeled = Labels::new(order.iter().map(|&i| labels.is_first(i)).collect()).unwrap();
        for kind in PhiKind::ALL {
            let a = bf_statistic_1d(&p, &labels, kind).unwrap();
            assert_eq!(a, bf_statistic_1d(&q, &relabeled, kind).unwrap());
            assert_eq!(a, bf_statistic_1d(&p, &labels.swapped(), kind).unwrap());
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let labels = Labels::from_sizes(2, 2).unwrap();
        assert!(bf_statistic_1d(&[1.0, 2.0, 3.0], &labels, PhiKind::L2).is_err());
    }

    #[test]
    fn hand_value_constant_versus_identity() {
        let rows = vec![vec![1.0, 0.5], vec![0.5, 1.0 / 3.0]];
        let g = GramMatrix::from_rows(&rows, 1, 1).unwrap();
        let labels = Labels::from_sizes(1, 1).unwrap();
        let s = pbf_statistic(&g, &labels, PhiKind::L2).unwrap();
        assert!((s.zeta_hat - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.scaled - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_is_zeta_times_factor() {
        let v = StatisticValue::new(0.3, 4, 6);
        assert_eq!(v.scaled, 0.3 * (24.0 / 10.0));
    }
}
