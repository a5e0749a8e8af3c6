//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, eigenvalues in nonincreasing order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Diagonalises the row-major symmetric `dim` x `dim` matrix `a`. Sweeps stop
/// once the off-diagonal Frobenius norm drops below `tol` times the norm of
/// the whole matrix.
pub fn symmetric_eigen(a: &[f64], dim: usize, tol: f64) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), dim * dim, "matrix must be dim x dim");
    let mut a = a.to_vec();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut converged = total == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&a, dim);
        if off <= tol * total {
            converged = true;
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * dim + q] - a[p * dim + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..dim {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * dim + p];
                    let arq = a[r * dim + q];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    a[r * dim + p] = np;
                    a[p * dim + r] = np;
                    a[r * dim + q] = nq;
                    a[q * dim + r] = nq;
                }
                a[p * dim + p] -= t * apq;
                a[q * dim + q] += t * apq;
                a[p * dim + q] = 0.0;
                a[q * dim + p] = 0.0;
                for r in 0..dim {
                    let vrp = v[r * dim + p];
                    let vrq = v[r * dim + q];
                    v[r * dim + p] = c * vrp - s * vrq;
                    v[r * dim + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a, dim);
        if off > tol * total {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                residual: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[j * dim + j].total_cmp(&a[i * dim + i]));
    let values = order.iter().map(|&i| a[i * dim + i]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..dim).map(|r| v[r * dim + k]).collect())
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &[f64], dim: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..dim {
        for q in (p + 1)..dim {
            s += 2.0 * a[p * dim + q] * a[p * dim + q];
        }
    }
    s.sqrt()
}
