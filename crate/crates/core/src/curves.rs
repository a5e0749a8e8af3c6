//! Functional observations, the pooled sample, and its Gram matrix.
//!
//! Curves are either sampled on a shared grid (inner products by quadrature)
//! or stored as coefficients in a shared orthonormal basis (inner products are
//! plain dot products). The Gram matrix of the pooled sample is the only input
//! the statistic needs, so it is computed once and reused for every
//! permutation.

use std::cell::Cell;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReprKind {
    Grid,
    Coeff,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// Values at the points of a shared [`GridSpec`].
    Grid(Vec<f64>),
    /// Coordinates in a shared orthonormal basis.
    Coeff(Vec<f64>),
}

impl Curve {
    pub fn values(&self) -> &[f64] {
        match self {
            Curve::Grid(v) | Curve::Coeff(v) => v,
        }
    }

    pub fn kind(&self) -> ReprKind {
        match self {
            Curve::Grid(_) => ReprKind::Grid,
            Curve::Coeff(_) => ReprKind::Coeff,
        }
    }

    pub fn dim(&self) -> usize {
        self.values().len()
    }

    pub fn into_values(self) -> Vec<f64> {
        match self {
            Curve::Grid(v) | Curve::Coeff(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    RiemannLeft,
}

/// Shared abscissae for grid curves plus the quadrature rule used to turn
/// pointwise products into L2 inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    points: Vec<f64>,
    quadrature: Quadrature,
    weights: Vec<f64>,
}

impl GridSpec {
    pub fn new(points: Vec<f64>, quadrature: Quadrature) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(bad) = points.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite abscissa {bad}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let weights = quadrature_weights(&points, quadrature);
        Ok(GridSpec {
            points,
            quadrature,
            weights,
        })
    }

    /// `len` equispaced points on [0, 1], trapezoid rule.
    pub fn unit_interval(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {len}"
            )));
        }
        let h = 1.0 / (len - 1) as f64;
        let points = (0..len).map(|j| j as f64 * h).collect();
        Self::new(points, Quadrature::Trapezoid)
    }

    pub fn with_quadrature(&self, quadrature: Quadrature) -> Self {
        GridSpec {
            points: self.points.clone(),
            quadrature,
            weights: quadrature_weights(&self.points, quadrature),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether consecutive spacings agree to within `rtol` of the mean spacing.
    pub fn is_equispaced(&self, rtol: f64) -> bool {
        let span = self.points[self.points.len() - 1] - self.points[0];
        let h = span / (self.points.len() - 1) as f64;
        self.points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= rtol * h)
    }
}

fn quadrature_weights(points: &[f64], rule: Quadrature) -> Vec<f64> {
    let k = points.len();
    let mut w = vec![0.0; k];
    match rule {
        Quadrature::Trapezoid => {
            for j in 0..k - 1 {
                let h = points[j + 1] - points[j];
                w[j] += 0.5 * h;
                w[j + 1] += 0.5 * h;
            }
        }
        Quadrature::RiemannLeft => {
            for j in 0..k - 1 {
                w[j] = points[j + 1] - points[j];
            }
        }
    }
    w
}

/// `<a, b>`: a quadrature approximation of the L2 integral for grid curves,
/// the exact dot product for coefficient curves.
pub fn inner_product(a: &Curve, b: &Curve, grid: Option<&GridSpec>) -> Result<f64> {
    if a.kind() != b.kind() {
        return Err(Error::MixedRepresentation);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    match a.kind() {
        ReprKind::Coeff => Ok(dot(a.values(), b.values())),
        ReprKind::Grid => {
            let grid = grid.ok_or(Error::MissingGrid)?;
            if grid.len() != a.dim() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    actual: a.dim(),
                });
            }
            Ok(weighted_dot(grid.weights(), a.values(), b.values()))
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| w * (x * y))
        .sum()
}

/// Group membership of the pooled sample: index `i` belongs to the first
/// sample when `is_first(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labels {
    first: Vec<bool>,
    n: usize,
}

impl Labels {
    pub fn new(first: Vec<bool>) -> Result<Self> {
        let n = first.iter().filter(|&&f| f).count();
        let m = first.len() - n;
        if n == 0 || m == 0 {
            return Err(Error::invalid(format!(
                "both groups need at least one curve (n = {n}, m = {m})"
            )));
        }
        Ok(Labels { first, n })
    }

    /// First `n` indices in the first group, the following `m` in the second.
    pub fn from_sizes(n: usize, m: usize) -> Result<Self> {
        let mut first = vec![true; n];
        first.resize(n + m, false);
        Self::new(first)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.first.len() - self.n
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    #[inline]
    pub fn is_first(&self, i: usize) -> bool {
        self.first[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.first
    }

    /// Same partition with the group roles exchanged.
    pub fn swapped(&self) -> Self {
        Labels {
            first: self.first.iter().map(|f| !f).collect(),
            n: self.m(),
        }
    }

    /// Labels of the relabeled sample `U[perm[0]], U[perm[1]], ...`: position
    /// `perm[k]` receives the label of position `k`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: perm.len(),
            });
        }
        let mut first = vec![false; self.len()];
        let mut seen = vec![false; self.len()];
        for (k, &p) in perm.iter().enumerate() {
            if p >= self.len() || seen[p] {
                return Err(Error::invalid("not a permutation"));
            }
            seen[p] = true;
            first[p] = self.first[k];
        }
        Ok(Labels { first, n: self.n })
    }
}

/// Pooled curves of both samples with their group labels.
#[derive(Debug, Clone)]
pub struct FunctionalSample {
    curves: Vec<Curve>,
    labels: Labels,
    grid: Option<GridSpec>,
}

impl FunctionalSample {
    pub fn new(curves: Vec<Curve>, labels: Labels, grid: Option<GridSpec>) -> Result<Self> {
        if curves.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: curves.len(),
            });
        }
        let kind = curves[0].kind();
        let dim = curves[0].dim();
        for (i, c) in curves.iter().enumerate() {
            if c.kind() != kind {
                return Err(Error::MixedRepresentation);
            }
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: c.dim(),
                });
            }
            if let Some(&value) = c.values().iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite { curve: i, value });
            }
        }
        if kind == ReprKind::Grid {
            let g = grid.as_ref().ok_or(Error::MissingGrid)?;
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: g.len(),
                    actual: dim,
                });
            }
        }
        Ok(FunctionalSample {
            curves,
            labels,
            grid,
        })
    }

    /// Pools `xs` (first sample) and `ys` (second sample).
    pub fn from_groups(xs: Vec<Curve>, ys: Vec<Curve>, grid: Option<GridSpec>) -> Result<Self> {
        let labels = Labels::from_sizes(xs.len(), ys.len())?;
        let mut curves = xs;
        curves.extend(ys);
        Self::new(curves, labels, grid)
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        self.grid.as_ref()
    }

    pub fn kind(&self) -> ReprKind {
        self.curves[0].kind()
    }

    pub fn n(&self) -> usize {
        self.labels.n()
    }

    pub fn m(&self) -> usize {
        self.labels.m()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn first_group(&self) -> impl Iterator<Item = &Curve> {
        self.curves
            .iter()
            .zip(self.labels.as_slice())
            .filter_map(|(c, &f)| f.then_some(c))
    }

    pub fn second_group(&self) -> impl Iterator<Item = &Curve> {
        self.curves
            .iter()
            .zip(self.labels.as_slice())
            .filter_map(|(c, &f)| (!f).then_some(c))
    }
}

/// Symmetric matrix of pairwise inner products of the pooled sample, stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<f64>,
    n: usize,
    m: usize,
}

impl GramMatrix {
    /// Builds a Gram matrix from explicit rows. The matrix must be square,
    /// finite and exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>], n: usize, m: usize) -> Result<Self> {
        let dim = rows.len();
        if dim != n + m {
            return Err(Error::DimensionMismatch {
                expected: n + m,
                actual: dim,
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        let g = GramMatrix { dim, entries, n, m };
        for a in 0..dim {
            for b in 0..dim {
                let v = g.get(a, b);
                if !v.is_finite() {
                    return Err(Error::NonFinite { curve: a, value: v });
                }
                if v != g.get(b, a) {
                    return Err(Error::invalid(format!(
                        "gram matrix not symmetric at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.dim + b]
    }

    /// Row `a`, i.e. the projections `<U_b, U_a>` of every curve onto `U_a`.
    #[inline]
    pub fn row(&self, a: usize) -> &[f64] {
        &self.entries[a * self.dim..(a + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|a| (0..a).all(|b| self.get(a, b) == self.get(b, a)))
    }

    /// Gram matrix of the curves selected by `idx`, in that order.
    pub fn submatrix(&self, idx: &[usize], n: usize, m: usize) -> Result<Self> {
        if idx.len() != n + m {
            return Err(Error::DimensionMismatch {
                expected: n + m,
                actual: idx.len(),
            });
        }
        let dim = idx.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for &a in idx {
            for &b in idx {
                entries.push(self.get(a, b));
            }
        }
        Ok(GramMatrix { dim, entries, n, m })
    }
}

thread_local! {
    static GRAM_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of Gram matrices built by [`gram`] on the current thread.
pub fn gram_call_count() -> u64 {
    GRAM_CALLS.with(|c| c.get())
}

/// Gram matrix of the pooled sample. Only the upper triangle is computed;
/// the lower triangle is a copy, so the result is exactly symmetric.
pub fn gram(sample: &FunctionalSample) -> Result<GramMatrix> {
    GRAM_CALLS.with(|c| c.set(c.get() + 1));
    let entries = pairwise_inner_products(sample.curves(), sample.grid())?;
    Ok(GramMatrix {
        dim: sample.len(),
        entries,
        n: sample.n(),
        m: sample.m(),
    })
}

/// Row-major `curves.len()` x `curves.len()` inner-product matrix.
pub fn pairwise_inner_products(curves: &[Curve], grid: Option<&GridSpec>) -> Result<Vec<f64>> {
    let weights = check_curves(curves, grid)?;
    let dim = curves.len();
    let mut entries = vec![0.0; dim * dim];
    entries
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(a, row)| {
            for (b, slot) in row.iter_mut().enumerate().skip(a) {
                *slot = pair_product(weights, curves[a].values(), curves[b].values());
            }
        });
    for a in 0..dim {
        for b in 0..a {
            entries[a * dim + b] = entries[b * dim + a];
        }
    }
    Ok(entries)
}

/// `cross[i][j] = <others[i], curves[j]>`.
pub fn cross_inner_products(
    others: &[Curve],
    curves: &[Curve],
    grid: Option<&GridSpec>,
) -> Result<Vec<Vec<f64>>> {
    let weights = check_curves(others, grid)?;
    if let (Some(a), Some(b)) = (others.first(), curves.first()) {
        if a.kind() != b.kind() {
            return Err(Error::MixedRepresentation);
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                actual: a.dim(),
            });
        }
    }
    Ok(others
        .par_iter()
        .map(|o| {
            curves
                .iter()
                .map(|c| pair_product(weights, o.values(), c.values()))
                .collect()
        })
        .collect())
}

// Both arguments enter symmetrically, so swapping two curves swaps their
// Gram entries bit for bit.
#[inline]
fn pair_product(weights: Option<&[f64]>, a: &[f64], b: &[f64]) -> f64 {
    match weights {
        Some(w) => weighted_dot(w, a, b),
        None => dot(a, b),
    }
}

// Checks that all curves share representation and dimension; returns the
// quadrature weights for grid curves.
fn check_curves<'g>(curves: &[Curve], grid: Option<&'g GridSpec>) -> Result<Option<&'g [f64]>> {
    let Some(first) = curves.first() else {
        return Ok(None);
    };
    let (kind, dim) = (first.kind(), first.dim());
    for c in curves {
        if c.kind() != kind {
            return Err(Error::MixedRepresentation);
        }
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: c.dim(),
            });
        }
    }
    match kind {
        ReprKind::Coeff => Ok(None),
        ReprKind::Grid => {
            let grid = grid.ok_or(Error::MissingGrid)?;
            if grid.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    actual: dim,
                });
            }
            Ok(Some(grid.weights()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(len: usize) -> GridSpec {
        GridSpec::unit_interval(len).unwrap()
    }

    fn sampled(grid: &GridSpec, f: impl Fn(f64) -> f64) -> Curve {
        Curve::Grid(grid.points().iter().map(|&t| f(t)).collect())
    }

    #[test]
    fn orthonormal_coefficients_are_orthogonal() {
        let a = Curve::Coeff(vec![1.0, 0.0]);
        let b = Curve::Coeff(vec![0.0, 1.0]);
        assert_eq!(inner_product(&a, &b, None).unwrap(), 0.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrand() {
        let g = unit_grid(101);
        let one = sampled(&g, |_| 1.0);
        let t = sampled(&g, |t| t);
        let v = inner_product(&one, &t, Some(&g)).unwrap();
        assert!((v - 0.5).abs() <= 1e-12, "{v}");
    }

    #[test]
    fn trapezoid_quadratic_within_error_bound() {
        // error of the trapezoid rule for t^2 on h = 0.01 is h^2/6 ~ 1.7e-5
        let g = unit_grid(101);
        let t = sampled(&g, |t| t);
        let v = inner_product(&t, &t, Some(&g)).unwrap();
        assert!((v - 1.0 / 3.0).abs() <= 2e-5, "{v}");
    }

    #[test]
    fn riemann_left_weights_cover_interval() {
        let g = unit_grid(11).with_quadrature(Quadrature::RiemannLeft);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert_eq!(*g.weights().last().unwrap(), 0.0);
    }

    #[test]
    fn dimension_and_grid_errors() {
        let a = Curve::Coeff(vec![1.0, 0.0]);
        let b = Curve::Coeff(vec![1.0]);
        assert!(matches!(
            inner_product(&a, &b, None),
            Err(Error::DimensionMismatch { .. })
        ));
        let g1 = Curve::Grid(vec![1.0, 2.0]);
        assert!(matches!(
            inner_product(&g1, &g1, None),
            Err(Error::MissingGrid)
        ));
        assert!(matches!(
            inner_product(&a, &g1, None),
            Err(Error::MixedRepresentation)
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![0.0], Quadrature::Trapezoid).is_err());
        assert!(GridSpec::new(vec![0.0, 0.5, 0.5], Quadrature::Trapezoid).is_err());
        assert!(GridSpec::new(vec![0.0, 0.2, 1.0], Quadrature::Trapezoid)
            .unwrap()
            .is_equispaced(1e-9)
            .eq(&false));
        assert!(unit_grid(101).is_equispaced(1e-9));
    }

    #[test]
    fn single_constant_curve_gram() {
        let s = FunctionalSample::new(
            vec![Curve::Coeff(vec![1.0]), Curve::Coeff(vec![1.0])],
            Labels::from_sizes(1, 1).unwrap(),
            None,
        )
        .unwrap();
        let g = gram(&s).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn gram_of_one_and_t() {
        let grid = unit_grid(1001);
        let s = FunctionalSample::from_groups(
            vec![sampled(&grid, |_| 1.0)],
            vec![sampled(&grid, |t| t)],
            Some(grid),
        )
        .unwrap();
        let g = gram(&s).unwrap();
        assert!((g.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((g.get(0, 1) - 0.5).abs() < 1e-12);
        assert!((g.get(1, 1) - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(g.get(0, 1), g.get(1, 0));
    }

    #[test]
    fn gram_counts_calls_on_this_thread() {
        let s = FunctionalSample::from_groups(
            vec![Curve::Coeff(vec![1.0, 2.0])],
            vec![Curve::Coeff(vec![0.5, -1.0])],
            None,
        )
        .unwrap();
        let before = gram_call_count();
        gram(&s).unwrap();
        gram(&s).unwrap();
        assert_eq!(gram_call_count() - before, 2);
    }

    #[test]
    fn sample_rejects_non_finite_and_empty_groups() {
        let bad = FunctionalSample::from_groups(
            vec![Curve::Coeff(vec![f64::NAN])],
            vec![Curve::Coeff(vec![1.0])],
            None,
        );
        assert!(matches!(bad, Err(Error::NonFinite { .. })));
        assert!(Labels::from_sizes(0, 3).is_err());
        let grid_missing = FunctionalSample::from_groups(
            vec![Curve::Grid(vec![1.0, 2.0])],
            vec![Curve::Grid(vec![1.0, 2.0])],
            None,
        );
        assert!(matches!(grid_missing, Err(Error::MissingGrid)));
    }

    #[test]
    fn labels_permute_and_swap() {
        let l = Labels::from_sizes(2, 1).unwrap();
        let p = l.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.as_slice(), &[true, false, true]);
        assert_eq!(l.swapped().n(), 1);
        assert!(l.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let rows = vec![vec![1.0, 0.5], vec![0.4, 1.0]];
        assert!(GramMatrix::from_rows(&rows, 1, 1).is_err());
    }
}
