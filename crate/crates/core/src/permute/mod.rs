//! Permutation calibration of the pBF test.
//!
//! Random relabelings of the pooled sample are drawn from a seeded ChaCha
//! stream, one independent stream per replicate index, so results do not
//! depend on how replicates are scheduled across threads.

mod engine;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use engine::{PermutationEngine, DEFAULT_TENSOR_LIMIT};

use crate::curves::{gram, FunctionalSample, GramMatrix, Labels};
use crate::error::{Error, Result};
pub use crate::rng::stream_rng as replicate_rng;
use crate::statistic::PhiKind;

/// Relative tolerance under which a permuted statistic counts as a tie with
/// the observed one (ties count toward the p-value numerator).
pub const TIE_RTOL: f64 = 1e-9;

pub const DEFAULT_B: usize = 500;
pub const DEFAULT_B_DATA: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermutationMode {
    Exhaustive,
    Randomized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub zeta_hat: f64,
    pub scaled: f64,
    pub p_value: f64,
    /// Random permutations drawn, or group assignments enumerated in
    /// exhaustive mode.
    #[serde(rename = "B")]
    pub b_used: usize,
    pub mode: PermutationMode,
    pub phi: PhiKind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Permuted values of `zeta_hat`, in replicate order.
    #[serde(rename = "replicates", skip_serializing_if = "Option::is_none", default)]
    pub replicate_stats: Option<Vec<f64>>,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationOptions {
    pub b: usize,
    pub seed: u64,
    pub keep_replicates: bool,
}

impl PermutationOptions {
    pub fn new(b: usize, seed: u64) -> Self {
        PermutationOptions {
            b,
            seed,
            keep_replicates: false,
        }
    }

    pub fn keep_replicates(mut self, keep: bool) -> Self {
        self.keep_replicates = keep;
        self
    }
}

/// Statistic of the same Gram matrix under different labels; the Gram matrix
/// is not recomputed.
pub fn permuted_statistic(gram: &GramMatrix, permuted: &Labels, kind: PhiKind) -> Result<f64> {
    if permuted.n() != gram.n() || permuted.m() != gram.m() {
        return Err(Error::invalid(format!(
            "relabeling has group sizes ({}, {}), sample has ({}, {})",
            permuted.n(),
            permuted.m(),
            gram.n(),
            gram.m()
        )));
    }
    Ok(PermutationEngine::new(gram, kind)
        .statistic(permuted)?
        .zeta_hat)
}

/// Randomized permutation test: builds the Gram matrix once, then compares
/// the observed statistic with `b` relabelings.
pub fn permutation_test(
    sample: &FunctionalSample,
    kind: PhiKind,
    b: usize,
    seed: u64,
) -> Result<TestResult> {
    let g = gram(sample)?;
    permutation_test_gram(&g, sample.labels(), kind, PermutationOptions::new(b, seed))
}

pub fn permutation_test_gram(
    gram: &GramMatrix,
    labels: &Labels,
    kind: PhiKind,
    opts: PermutationOptions,
) -> Result<TestResult> {
    let engine = PermutationEngine::new(gram, kind);
    permutation_test_engine(&engine, labels, opts)
}

/// Randomized test on a prepared engine; use this to test several label
/// sets, or to reuse one engine across calls.
pub fn permutation_test_engine(
    engine: &PermutationEngine,
    labels: &Labels,
    opts: PermutationOptions,
) -> Result<TestResult> {
    if opts.b == 0 {
        return Err(Error::invalid("number of permutations B must be at least 1"));
    }
    let observed = engine.statistic(labels)?;
    let replicates = random_replicates(engine, labels.n().min(labels.m()), opts.b, opts.seed);
    let exceed = count_at_least(&replicates, observed.zeta_hat, engine.phi_scale());
    Ok(TestResult {
        zeta_hat: observed.zeta_hat,
        scaled: observed.scaled,
        p_value: (exceed + 1) as f64 / (opts.b + 1) as f64,
        b_used: opts.b,
        mode: PermutationMode::Randomized,
        phi: engine.kind(),
        n: labels.n(),
        m: labels.m(),
        seed: opts.seed,
        replicate_stats: opts.keep_replicates.then_some(replicates),
    })
}

/// `b` permuted statistics; replicate `r` uses stream `r` of the ChaCha
/// generator keyed by `seed`.
pub fn random_replicates(engine: &PermutationEngine, group: usize, b: usize, seed: u64) -> Vec<f64> {
    let dim = engine.dim();
    (0..b)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(dim), Vec::with_capacity(group)),
            |(idx, members), r| {
                let mut rng = replicate_rng(seed, r as u64);
                idx.clear();
                idx.extend(0..dim);
                let (chosen, _) = idx.partial_shuffle(&mut rng, group);
                members.clear();
                members.extend_from_slice(chosen);
                members.sort_unstable();
                engine.zeta_of_group(members)
            },
        )
        .collect()
}

fn count_at_least(values: &[f64], observed: f64, scale: f64) -> usize {
    let tol = TIE_RTOL * (observed.abs() + scale);
    values.iter().filter(|&&v| v >= observed - tol).count()
}

/// Number of distinct group assignments, `C(N, n)`, saturating at `u128::MAX`.
pub fn assignment_count(n: usize, m: usize) -> u128 {
    let k = n.min(m) as u128;
    let total = (n + m) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul(total - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Statistic for every distinct group assignment with the same group sizes,
/// in lexicographic order of the smaller group's members.
pub fn enumerate_assignments(engine: &PermutationEngine, n: usize, m: usize) -> Vec<f64> {
    let k = n.min(m);
    let dim = engine.dim();
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        out.push(engine.zeta_of_group(&comb));
        // advance to the next k-combination of 0..dim
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if comb[i] < dim - k + i {
                comb[i] += 1;
                for j in i + 1..k {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact permutation p-value over all `C(N, n)` group assignments. Fails when
/// that count exceeds `budget`.
pub fn exhaustive_test(
    gram: &GramMatrix,
    labels: &Labels,
    kind: PhiKind,
    budget: usize,
) -> Result<TestResult> {
    let count = assignment_count(labels.n(), labels.m());
    if count > budget as u128 {
        return Err(Error::invalid(format!(
            "{count} group assignments exceed the enumeration budget {budget}"
        )));
    }
    let engine = PermutationEngine::new(gram, kind);
    let observed = engine.statistic(labels)?;
    let all = enumerate_assignments(&engine, labels.n(), labels.m());
    let exceed = count_at_least(&all, observed.zeta_hat, engine.phi_scale());
    Ok(TestResult {
        zeta_hat: observed.zeta_hat,
        scaled: observed.scaled,
        p_value: exceed as f64 / all.len() as f64,
        b_used: all.len(),
        mode: PermutationMode::Exhaustive,
        phi: kind,
        n: labels.n(),
        m: labels.m(),
        seed: 0,
        replicate_stats: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValue {
    pub value: f64,
    pub mode: PermutationMode,
    /// Assignments enumerated, or permutations sampled.
    pub evaluated: usize,
}

/// `inf { t : F(t) >= 1 - alpha }` for the permutation distribution `F` of
/// the statistic. Exact when `C(N, n) <= budget`; otherwise estimated from
/// `budget` random permutations drawn with `seed`.
pub fn critical_value(
    gram: &GramMatrix,
    labels: &Labels,
    kind: PhiKind,
    alpha: f64,
    budget: usize,
    seed: u64,
) -> Result<CriticalValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if budget == 0 {
        return Err(Error::invalid("enumeration budget must be positive"));
    }
    if labels.len() != gram.dim() {
        return Err(Error::DimensionMismatch {
            expected: gram.dim(),
            actual: labels.len(),
        });
    }
    let engine = PermutationEngine::new(gram, kind);
    let exact = assignment_count(labels.n(), labels.m()) <= budget as u128;
    let (mut values, mode) = if exact {
        (
            enumerate_assignments(&engine, labels.n(), labels.m()),
            PermutationMode::Exhaustive,
        )
    } else {
        (
            random_replicates(&engine, labels.n().min(labels.m()), budget, seed),
            PermutationMode::Randomized,
        )
    };
    values.sort_unstable_by(f64::total_cmp);
    Ok(CriticalValue {
        value: upper_quantile(&values, alpha),
        mode,
        evaluated: values.len(),
    })
}

/// Smallest sorted value `v_k` with `k / len >= 1 - alpha`.
pub fn upper_quantile(sorted: &[f64], alpha: f64) -> f64 {
    let len = sorted.len() as f64;
    let target = 1.0 - alpha;
    let k = (1..=sorted.len())
        .find(|&k| k as f64 / len >= target)
        .unwrap_or(sorted.len());
    sorted[k - 1]
}
