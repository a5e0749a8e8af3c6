//! Label-free precomputation for fast evaluation of the statistic under many
//! relabelings of one pooled sample.
//!
//! Write `D_i[j,k] = phi((G_ij - G_ik)^2)` for direction `i`. With `a` the
//! indicator of one group (size `n`, the other has size `m`), every group sum
//! needed by the statistic is either
//!
//! * linear in `a`: `s'a` with `s_i = sum_jk D_i[j,k]`, `c'a` with
//!   `c_j = sum_ik D_i[j,k]`,
//! * quadratic: `a'Ma` with `M = sum_i D_i`, `a'Ra` with `R[i][j] = sum_k D_i[j,k]`,
//! * or the single cubic term `Q(a) = sum_{i,j,k in A} D_i[j,k]`.
//!
//! `Q` is evaluated over unordered triples of the smaller group from a packed
//! tensor `T[p,q,r] = D_p[q,r] + D_q[p,r] + D_r[p,q]` (p < q < r) plus a pair
//! term `P[p,q] = D_p[p,q] + D_q[p,q]`; both depend only on the Gram matrix.

use crate::curves::{GramMatrix, Labels};
use crate::error::{Error, Result};
use crate::statistic::{PhiKind, StatisticValue};

/// Largest packed triple tensor kept in memory (entries, 8 bytes each).
pub const DEFAULT_TENSOR_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone)]
enum Triples {
    Packed { values: Vec<f64>, offsets: Vec<usize> },
    // recomputed from the Gram matrix on every call
    OnTheFly,
}

#[derive(Debug, Clone)]
pub struct PermutationEngine {
    dim: usize,
    kind: PhiKind,
    gram: Vec<f64>,
    triples: Triples,
    pair: Vec<f64>,
    m_mat: Vec<f64>,
    r_mat: Vec<f64>,
    row_tot: Vec<f64>,
    col_tot: Vec<f64>,
    total: f64,
}

impl PermutationEngine {
    pub fn new(gram: &GramMatrix, kind: PhiKind) -> Self {
        Self::with_tensor_limit(gram, kind, DEFAULT_TENSOR_LIMIT)
    }

    /// Like [`new`](Self::new), but keeps the triple tensor only when it has at
    /// most `limit` entries.
    pub fn with_tensor_limit(gram: &GramMatrix, kind: PhiKind, limit: usize) -> Self {
        let dim = gram.dim();
        let g = gram.entries().to_vec();
        let at = |a: usize, b: usize| g[a * dim + b];
        let d = |i: usize, j: usize, k: usize| kind.of_diff(at(i, j) - at(i, k));

        let triple_count = n_choose_3(dim);
        let pack = triple_count <= limit as u128;
        let mut values = Vec::with_capacity(if pack { triple_count as usize } else { 0 });
        let mut offsets = if pack { vec![0usize; dim * dim] } else { Vec::new() };

        let mut pair = vec![0.0; dim * dim];
        let mut m_mat = vec![0.0; dim * dim];
        let mut r_mat = vec![0.0; dim * dim];

        for p in 0..dim {
            for q in (p + 1)..dim {
                let e1 = d(p, p, q);
                let e2 = d(q, p, q);
                pair[p * dim + q] = e1 + e2;
                pair[q * dim + p] = e1 + e2;
                m_mat[p * dim + q] += e1 + e2;
                r_mat[p * dim + p] += e1;
                r_mat[p * dim + q] += e1;
                r_mat[q * dim + p] += e2;
                r_mat[q * dim + q] += e2;

                if pack {
                    offsets[p * dim + q] = values.len();
                }
                for r in (q + 1)..dim {
                    let dp = d(p, q, r);
                    let dq = d(q, p, r);
                    let dr = d(r, p, q);
                    if pack {
                        values.push(dp + dq + dr);
                    }
                    m_mat[q * dim + r] += dp;
                    m_mat[p * dim + r] += dq;
                    m_mat[p * dim + q] += dr;
                    r_mat[p * dim + q] += dp;
                    r_mat[p * dim + r] += dp;
                    r_mat[q * dim + p] += dq;
                    r_mat[q * dim + r] += dq;
                    r_mat[r * dim + p] += dr;
                    r_mat[r * dim + q] += dr;
                }
            }
        }
        // M accumulated on the upper triangle only
        for p in 0..dim {
            for q in (p + 1)..dim {
                m_mat[q * dim + p] = m_mat[p * dim + q];
            }
        }
        let row_tot: Vec<f64> = (0..dim)
            .map(|i| r_mat[i * dim..(i + 1) * dim].iter().sum())
            .collect();
        let mut col_tot = vec![0.0; dim];
        for i in 0..dim {
            for (c, v) in col_tot.iter_mut().zip(&r_mat[i * dim..(i + 1) * dim]) {
                *c += v;
            }
        }
        let total = row_tot.iter().sum();

        PermutationEngine {
            dim,
            kind,
            gram: g,
            triples: if pack {
                Triples::Packed { values, offsets }
            } else {
                Triples::OnTheFly
            },
            pair,
            m_mat,
            r_mat,
            row_tot,
            col_tot,
            total,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> PhiKind {
        self.kind
    }

    pub fn is_packed(&self) -> bool {
        matches!(self.triples, Triples::Packed { .. })
    }

    /// Mean of `D_i[j,k]` over all index triples; the natural magnitude of the
    /// statistic's building blocks.
    pub fn phi_scale(&self) -> f64 {
        let d = self.dim as f64;
        self.total / (d * d * d)
    }

    pub fn statistic(&self, labels: &Labels) -> Result<StatisticValue> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: labels.len(),
            });
        }
        let want_first = labels.n() <= labels.m();
        let members: Vec<usize> = (0..self.dim)
            .filter(|&i| labels.is_first(i) == want_first)
            .collect();
        Ok(StatisticValue::new(
            self.zeta_of_group(&members),
            labels.n(),
            labels.m(),
        ))
    }

    /// Statistic for the partition whose one group is `members` (sorted,
    /// distinct, non-empty, not the whole sample). Which group it is does not
    /// matter: the statistic is symmetric in the two samples.
    pub fn zeta_of_group(&self, members: &[usize]) -> f64 {
        let dim = self.dim;
        let n = members.len() as f64;
        let m = (dim - members.len()) as f64;
        debug_assert!(n >= 1.0 && m >= 1.0);
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));

        let q = 2.0 * self.cubic(members);
        let (mut ama, mut ara, mut sa, mut ca) = (0.0, 0.0, 0.0, 0.0);
        for &j in members {
            let mrow = &self.m_mat[j * dim..(j + 1) * dim];
            let rrow = &self.r_mat[j * dim..(j + 1) * dim];
            for &k in members {
                ama += mrow[k];
                ara += rrow[k];
            }
            sa += self.row_tot[j];
            ca += self.col_tot[j];
        }

        let inv = 1.0 / n + 1.0 / m;
        let c_aa = -inv * inv;
        let c_r = 2.0 * inv / m;
        let c_s = -1.0 / (m * m);
        let first = c_aa * q + c_r * ara + c_s * sa;
        let second = c_aa * (ama - q) + c_r * (ca - ara) + c_s * (self.total - sa);
        0.5 * (first / n + second / m)
    }

    // sum over unordered triples and pairs of `members` of T and P
    fn cubic(&self, members: &[usize]) -> f64 {
        let dim = self.dim;
        let mut acc = 0.0;
        match &self.triples {
            Triples::Packed { values, offsets } => {
                for (ip, &p) in members.iter().enumerate() {
                    let prow = &self.pair[p * dim..(p + 1) * dim];
                    for (iq, &q) in members.iter().enumerate().skip(ip + 1) {
                        acc += prow[q];
                        let row = &values[offsets[p * dim + q]..];
                        let base = q + 1;
                        let mut s = 0.0;
                        for &r in &members[iq + 1..] {
                            s += row[r - base];
                        }
                        acc += s;
                    }
                }
            }
            Triples::OnTheFly => {
                let g = &self.gram;
                let kind = self.kind;
                for (ip, &p) in members.iter().enumerate() {
                    for (iq, &q) in members.iter().enumerate().skip(ip + 1) {
                        acc += self.pair[p * dim + q];
                        let gp = &g[p * dim..(p + 1) * dim];
                        let gq = &g[q * dim..(q + 1) * dim];
                        let mut s = 0.0;
                        for &r in &members[iq + 1..] {
                            let gr = &g[r * dim..(r + 1) * dim];
                            s += kind.of_diff(gp[q] - gp[r])
                                + kind.of_diff(gq[p] - gq[r])
                                + kind.of_diff(gr[p] - gr[q]);
                        }
                        acc += s;
                    }
                }
            }
        }
        acc
    }
}

fn n_choose_3(n: usize) -> u128 {
    let n = n as u128;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistic::pbf_statistic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gram(n: usize, m: usize, dim: usize, seed: u64) -> GramMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..n + m)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum())
                    .collect()
            })
            .collect();
        GramMatrix::from_rows(&rows, n, m).unwrap()
    }

    #[test]
    fn matches_direct_statistic() {
        for (n, m, seed) in [(1, 1, 1), (2, 5, 2), (6, 6, 3), (9, 4, 4), (1, 7, 5)] {
            let g = random_gram(n, m, 3, seed);
            let labels = Labels::from_sizes(n, m).unwrap();
            for kind in PhiKind::ALL {
                let direct = pbf_statistic(&g, &labels, kind).unwrap().zeta_hat;
                let packed = PermutationEngine::new(&g, kind);
                let lazy = PermutationEngine::with_tensor_limit(&g, kind, 0);
                assert!(!lazy.is_packed() || n + m < 3);
                for e in [&packed, &lazy] {
                    let z = e.statistic(&labels).unwrap().zeta_hat;
                    assert!(
                        (z - direct).abs() <= 1e-12 * (1.0 + direct.abs()),
                        "n={n} m={m} {kind}: {z} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn complement_gives_same_value() {
        let g = random_gram(4, 6, 2, 11);
        let e = PermutationEngine::new(&g, PhiKind::Exp);
        let a = [0, 2, 5, 7];
        let b = [1, 3, 4, 6, 8, 9];
        let (za, zb) = (e.zeta_of_group(&a), e.zeta_of_group(&b));
        assert!((za - zb).abs() < 1e-13, "{za} {zb}");
    }

    #[test]
    fn phi_scale_is_positive_for_distinct_curves() {
        let g = random_gram(3, 3, 2, 9);
        assert!(PermutationEngine::new(&g, PhiKind::Log).phi_scale() > 0.0);
    }
}
