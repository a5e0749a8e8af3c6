#![allow(dead_code)]

use pbf::curves::{Curve, FunctionalSample, GramMatrix, GridSpec, Labels};
use pbf::statistic::PhiKind;

/// The three loss functions, written out independently of the library.
pub fn phi_oracle(kind: PhiKind, z: f64) -> f64 {
    match kind {
        PhiKind::L2 => z.sqrt() / 2.0,
        PhiKind::Exp => 1.0 - (-z / 2.0).exp(),
        PhiKind::Log => (1.0 + z).ln(),
    }
}

/// The estimator as six literal triple sums over inner products, with the
/// first `n` indices forming the first sample.
pub fn pbf_statistic_oracle(g: &[Vec<f64>], n: usize, m: usize, kind: PhiKind) -> f64 {
    let x: Vec<usize> = (0..n).collect();
    let y: Vec<usize> = (n..n + m).collect();
    let ip = |a: usize, b: usize| g[a][b];
    let f = |u: f64, v: f64| phi_oracle(kind, (u - v) * (u - v));
    let (nf, mf) = (n as f64, m as f64);

    let mut s1 = 0.0;
    for &i in &x {
        for &j in &x {
            for &k in &y {
                s1 += f(ip(j, i), ip(k, i));
            }
        }
    }
    let mut s2 = 0.0;
    for &i in &x {
        for &j in &x {
            for &k in &x {
                s2 += f(ip(j, i), ip(k, i));
            }
        }
    }
    let mut s3 = 0.0;
    for &i in &x {
        for &j in &y {
            for &k in &y {
                s3 += f(ip(j, i), ip(k, i));
            }
        }
    }
    let mut s4 = 0.0;
    for &i in &y {
        for &j in &x {
            for &k in &y {
                s4 += f(ip(j, i), ip(k, i));
            }
        }
    }
    let mut s5 = 0.0;
    for &i in &y {
        for &j in &x {
            for &k in &x {
                s5 += f(ip(j, i), ip(k, i));
            }
        }
    }
    let mut s6 = 0.0;
    for &i in &y {
        for &j in &y {
            for &k in &y {
                s6 += f(ip(j, i), ip(k, i));
            }
        }
    }
    s1 / (nf * nf * mf) - s2 / (2.0 * nf * nf * nf) - s3 / (2.0 * nf * mf * mf) + s4 / (nf * mf * mf)
        - s5 / (2.0 * nf * nf * mf)
        - s6 / (2.0 * mf * mf * mf)
}

/// Plain dot-product Gram matrix of coefficient vectors.
pub fn dot_gram(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|a| {
            vectors
                .iter()
                .map(|b| a.iter().zip(b).map(|(p, q)| p * q).sum())
                .collect()
        })
        .collect()
}

/// Trapezoid-rule Gram matrix of grid curves, computed directly.
pub fn trapezoid_gram(curves: &[Vec<f64>], t: &[f64]) -> Vec<Vec<f64>> {
    let ip = |a: &[f64], b: &[f64]| {
        let mut s = 0.0;
        for k in 0..t.len() - 1 {
            s += 0.5 * (t[k + 1] - t[k]) * (a[k] * b[k] + a[k + 1] * b[k + 1]);
        }
        s
    };
    curves
        .iter()
        .map(|a| curves.iter().map(|b| ip(a, b)).collect())
        .collect()
}

pub fn coeff_sample(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> FunctionalSample {
    FunctionalSample::from_groups(
        xs.iter().cloned().map(Curve::Coeff).collect(),
        ys.iter().cloned().map(Curve::Coeff).collect(),
        None,
    )
    .unwrap()
}

pub fn grid_sample(xs: &[Vec<f64>], ys: &[Vec<f64>], grid: &GridSpec) -> FunctionalSample {
    FunctionalSample::from_groups(
        xs.iter().cloned().map(Curve::Grid).collect(),
        ys.iter().cloned().map(Curve::Grid).collect(),
        Some(grid.clone()),
    )
    .unwrap()
}

pub fn gram_from_rows(rows: &[Vec<f64>], n: usize, m: usize) -> GramMatrix {
    GramMatrix::from_rows(rows, n, m).unwrap()
}

/// Relative closeness with an absolute floor for values near zero.
pub fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() <= 1e-15
}

/// Rows of `g` and columns reordered so that the first group comes first.
pub fn reorder_by_labels(g: &[Vec<f64>], labels: &Labels) -> (Vec<Vec<f64>>, usize, usize) {
    let order: Vec<usize> = (0..labels.len())
        .filter(|&i| labels.is_first(i))
        .chain((0..labels.len()).filter(|&i| !labels.is_first(i)))
        .collect();
    let rows = order
        .iter()
        .map(|&a| order.iter().map(|&b| g[a][b]).collect())
        .collect();
    (rows, labels.n(), labels.m())
}

pub fn phi_kinds() -> [PhiKind; 3] {
    [PhiKind::L2, PhiKind::Exp, PhiKind::Log]
}
