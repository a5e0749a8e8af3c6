//! Spectral approximation of the limiting law of the scaled statistic.
//!
//! Under the null, `nm/(n+m) * zeta_hat` behaves like `sum_k lambda_k Z_k^2`,
//! where `lambda_k` are the eigenvalues of a degenerate kernel on the common
//! distribution. Here the kernel is estimated from one pooled sample, its
//! spectrum is extracted with a Jacobi sweep, and the weighted chi-square sum
//! is sampled by Monte Carlo. Under contiguous mixture alternatives each
//! `Z_k` picks up a mean shift.
//!
//! These are diagnostics; test decisions always come from permutations.

pub mod jacobi;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::GramMatrix;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::statistic::PhiKind;

/// Eigenvalues below this fraction of the largest one are dropped.
pub const TRUNCATION_RTOL: f64 = 1e-12;

const DRAW_CHUNK: usize = 4096;

/// Dense symmetric `dim` x `dim` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        let k = KernelMatrix { dim, data };
        if !(0..dim).all(|a| (0..a).all(|b| k.get(a, b) == k.get(b, a))) {
            return Err(Error::invalid("kernel matrix must be symmetric"));
        }
        Ok(k)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.dim + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.dim..(a + 1) * self.dim]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|a| self.get(a, a)).sum()
    }

    /// `w' K w`
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        (0..self.dim)
            .map(|a| w[a] * self.row(a).iter().zip(w).map(|(k, x)| k * x).sum::<f64>())
            .sum()
    }
}

/// Averaged projection kernel `K[a][b] = (1/N) sum_c phi((G_ac - G_bc)^2)`,
/// i.e. `E phi(|<u,U> - <v,U>|^2)` with `U` over the pooled sample.
pub fn projection_kernel(gram: &GramMatrix, kind: PhiKind) -> Vec<f64> {
    let dim = gram.dim();
    let inv = 1.0 / dim as f64;
    let mut k = vec![0.0; dim * dim];
    k.par_chunks_mut(dim).enumerate().for_each(|(a, row)| {
        let ga = gram.row(a);
        for (b, slot) in row.iter_mut().enumerate().skip(a + 1) {
            let gb = gram.row(b);
            let s: f64 = ga.iter().zip(gb).map(|(x, y)| kind.of_diff(x - y)).sum();
            *slot = s * inv;
        }
    });
    for a in 0..dim {
        for b in 0..a {
            k[a * dim + b] = k[b * dim + a];
        }
    }
    k
}

/// Empirical degenerate kernel of the statistic.
///
/// Starts from
/// `h(u,v) = E phi(|<u,U1> - <U2,U1>|^2) + E phi(|<v,U1> - <U2,U1>|^2) - 2 E phi(|<u,U1> - <v,U1>|^2)`
/// with expectations over the pooled sample,
/// double-centres it, and halves it. The halving makes this the kernel of the
/// V-statistic itself: for `n = m` and `w = (1/n on the first group, -1/m on
/// the second)`, `zeta_hat = w' H w` exactly.
pub fn empirical_h_matrix(gram: &GramMatrix, kind: PhiKind) -> KernelMatrix {
    let dim = gram.dim();
    let k = projection_kernel(gram, kind);
    let avg: Vec<f64> = (0..dim)
        .map(|a| k[a * dim..(a + 1) * dim].iter().sum::<f64>() / dim as f64)
        .collect();
    let mut h: Vec<f64> = (0..dim * dim)
        .map(|ab| {
            let (a, b) = (ab / dim, ab % dim);
            avg[a] + avg[b] - 2.0 * k[ab]
        })
        .collect();
    double_center(&mut h, dim);
    for v in &mut h {
        *v *= 0.5;
    }
    symmetrize(&mut h, dim);
    KernelMatrix { dim, data: h }
}

fn double_center(h: &mut [f64], dim: usize) {
    let row_mean: Vec<f64> = (0..dim)
        .map(|a| h[a * dim..(a + 1) * dim].iter().sum::<f64>() / dim as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / dim as f64;
    // symmetric input: column means equal row means
    for a in 0..dim {
        for b in 0..dim {
            h[a * dim + b] += grand - row_mean[a] - row_mean[b];
        }
    }
}

fn symmetrize(h: &mut [f64], dim: usize) {
    for a in 0..dim {
        for b in 0..a {
            let v = 0.5 * (h[a * dim + b] + h[b * dim + a]);
            h[a * dim + b] = v;
            h[b * dim + a] = v;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSpectrum {
    /// Nonincreasing estimated eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Per-eigenfunction mean shifts of the limit under a contiguous
    /// alternative, when estimated.
    pub shift_means: Option<Vec<f64>>,
    pub n_used: usize,
    pub phi: PhiKind,
    /// Limit of `n / (n + m)`.
    pub lambda_ratio: f64,
    #[serde(skip)]
    eigenvectors: Vec<Vec<f64>>,
}

impl KernelSpectrum {
    /// Spectrum of `h / N` for an already assembled kernel matrix.
    pub fn from_kernel(h: &KernelMatrix, phi: PhiKind, lambda_ratio: f64) -> Result<Self> {
        if !(lambda_ratio > 0.0 && lambda_ratio < 1.0) {
            return Err(Error::invalid(format!(
                "lambda ratio must lie in (0, 1), got {lambda_ratio}"
            )));
        }
        let dim = h.dim();
        let scaled: Vec<f64> = h.data().iter().map(|v| v / dim as f64).collect();
        let eig = jacobi::symmetric_eigen(&scaled, dim, jacobi::DEFAULT_TOL)?;
        let top = eig.values.first().copied().unwrap_or(0.0);
        let keep = if top > 0.0 {
            eig.values
                .iter()
                .take_while(|&&v| v >= TRUNCATION_RTOL * top)
                .count()
        } else {
            0
        };
        Ok(KernelSpectrum {
            eigenvalues: eig.values[..keep].to_vec(),
            shift_means: None,
            n_used: dim,
            phi,
            lambda_ratio,
            eigenvectors: eig.vectors.into_iter().take(keep).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Eigenfunction `k` at the sample points, normalised to unit mean square.
    pub fn eigenfunction_at_sample(&self, k: usize) -> Vec<f64> {
        let s = (self.n_used as f64).sqrt();
        self.eigenvectors[k].iter().map(|v| v * s).collect()
    }
}

/// Eigenvalues of `H / N` for the empirical kernel of `gram`.
pub fn spectrum_estimate(gram: &GramMatrix, kind: PhiKind, lambda_ratio: f64) -> Result<KernelSpectrum> {
    if gram.dim() < 3 {
        return Err(Error::invalid(format!(
            "spectrum needs at least 3 curves, got {}",
            gram.dim()
        )));
    }
    KernelSpectrum::from_kernel(&empirical_h_matrix(gram, kind), kind, lambda_ratio)
}

/// Mean shift of the limit law under `(1 - delta/sqrt(m)) F + delta/sqrt(m) L`
/// contamination of the second sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitShift {
    pub delta: f64,
    pub lambda_ratio: f64,
    /// `int phi_k dL - int phi_k dF` per eigenfunction.
    pub mean_diffs: Vec<f64>,
}

impl LimitShift {
    /// `sqrt(lambda) * delta * (int phi_k dL - int phi_k dF)`
    pub fn means(&self) -> Vec<f64> {
        let f = self.lambda_ratio.sqrt() * self.delta;
        self.mean_diffs.iter().map(|d| f * d).collect()
    }
}

/// Estimates the eigenfunction means under a contaminating law `L`.
///
/// `gram` is the Gram matrix of the sample from `F` used to build `spectrum`;
/// `cross[x][c]` holds `<L_x, U_c>` for a separate sample `L_x` from `L`.
/// Eigenfunctions are extended to the new points with the Nystrom formula.
pub fn estimate_shift(
    spectrum: &KernelSpectrum,
    gram: &GramMatrix,
    cross: &[Vec<f64>],
    delta: f64,
) -> Result<LimitShift> {
    let dim = gram.dim();
    if spectrum.n_used != dim {
        return Err(Error::DimensionMismatch {
            expected: spectrum.n_used,
            actual: dim,
        });
    }
    if cross.is_empty() {
        return Err(Error::invalid("contaminant sample is empty"));
    }
    if let Some(row) = cross.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: row.len(),
        });
    }
    let kind = spectrum.phi;
    let k = projection_kernel(gram, kind);
    let row_mean: Vec<f64> = (0..dim)
        .map(|a| k[a * dim..(a + 1) * dim].iter().sum::<f64>() / dim as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / dim as f64;

    // centred kernel between each new point and the sample, same scaling as
    // `empirical_h_matrix`
    let h_new: Vec<Vec<f64>> = cross
        .par_iter()
        .map(|x| {
            let kx: Vec<f64> = (0..dim)
                .map(|a| {
                    let ga = gram.row(a);
                    x.iter().zip(ga).map(|(p, q)| kind.of_diff(p - q)).sum::<f64>() / dim as f64
                })
                .collect();
            let kx_mean = kx.iter().sum::<f64>() / dim as f64;
            (0..dim)
                .map(|a| -(kx[a] - kx_mean - row_mean[a] + grand))
                .collect()
        })
        .collect();

    let mean_diffs = (0..spectrum.len())
        .map(|kk| {
            let lam = spectrum.eigenvalues[kk];
            let phi_k = spectrum.eigenfunction_at_sample(kk);
            let at_f = phi_k.iter().sum::<f64>() / dim as f64;
            let at_l = h_new
                .iter()
                .map(|h| {
                    h.iter().zip(&phi_k).map(|(a, b)| a * b).sum::<f64>() / (dim as f64 * lam)
                })
                .sum::<f64>()
                / cross.len() as f64;
            at_l - at_f
        })
        .collect();
    Ok(LimitShift {
        delta,
        lambda_ratio: spectrum.lambda_ratio,
        mean_diffs,
    })
}

/// Monte-Carlo draws of `sum_k lambda_k (xi_k + shift_k)^2` with standard
/// normal `xi_k`. Draws are generated in fixed-size chunks, each from its own
/// substream of `seed`, so the output does not depend on the thread count.
pub fn sample_limit_law(
    spectrum: &KernelSpectrum,
    draws: usize,
    shift: Option<&[f64]>,
    seed: u64,
) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(Error::invalid("need at least one draw"));
    }
    let lambdas = &spectrum.eigenvalues;
    let zero = vec![0.0; lambdas.len()];
    let shift = match shift {
        Some(s) if s.len() != lambdas.len() => {
            return Err(Error::DimensionMismatch {
                expected: lambdas.len(),
                actual: s.len(),
            })
        }
        Some(s) => s,
        None => &zero,
    };
    let chunks = draws.div_ceil(DRAW_CHUNK);
    let out: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = DRAW_CHUNK.min(draws - c * DRAW_CHUNK);
            (0..len)
                .map(|_| {
                    lambdas
                        .iter()
                        .zip(shift)
                        .map(|(l, mu)| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            l * (z + mu) * (z + mu)
                        })
                        .sum::<f64>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(out)
}
