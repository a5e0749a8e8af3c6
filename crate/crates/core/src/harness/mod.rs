//! Level and power studies over the named scenarios, sub-sampling studies
//! for external data, and the CSV formats used to persist both.
//!
//! Replication `i` of a study draws its data from a seed derived from
//! `(config.seed, i)`, so any single replication can be rerun on its own and
//! the aggregate does not depend on scheduling.

mod ingest;
mod ledger;
mod scenario;

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ingest::{
    ingest_csv, ingest_labelled, ingest_pair, read_grid_file, write_curves_csv, CurveSet,
    HeaderMode, Ingested,
};
pub use ledger::{append_ledger, write_json, LedgerRow};
pub use scenario::{
    parse_kv_pairs, parse_phi_list, Param, ScenarioConfig, ScenarioId, ScenarioParams, DEFAULT_ALPHA,
    DEFAULT_GRID_POINTS, DEFAULT_REPS, EX7_DEFAULT_D,
};

use crate::curves::{gram, Curve, FunctionalSample, GramMatrix, Labels};
use crate::error::{Error, Result};
use crate::permute::{permutation_test_engine, PermutationEngine, PermutationOptions, TestResult};
use crate::rng::{derive_seed, stream_rng};
use crate::simgen::{render, Frame};
use crate::statistic::PhiKind;

/// Rejection count for one φ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiPower {
    pub phi: PhiKind,
    pub rejections: usize,
    pub reps: usize,
    pub rejection_rate: f64,
    /// `sqrt(p (1 - p) / reps)`
    pub mc_stderr: f64,
}

impl PhiPower {
    pub fn new(phi: PhiKind, rejections: usize, reps: usize) -> Self {
        let rate = rejections as f64 / reps as f64;
        PhiPower {
            phi,
            rejections,
            reps,
            rejection_rate: rate,
            mc_stderr: (rate * (1.0 - rate) / reps as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub scenario: String,
    pub param: String,
    pub value: f64,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub reps_done: usize,
    pub by_phi: Vec<PhiPower>,
}

impl PowerEstimate {
    pub fn get(&self, phi: PhiKind) -> Option<&PhiPower> {
        self.by_phi.iter().find(|p| p.phi == phi)
    }

    pub fn rejection_rate(&self, phi: PhiKind) -> Option<f64> {
        self.get(phi).map(|p| p.rejection_rate)
    }

    pub fn mc_stderr(&self, phi: PhiKind) -> Option<f64> {
        self.get(phi).map(|p| p.mc_stderr)
    }

    pub fn ledger_rows(&self) -> Vec<LedgerRow> {
        self.by_phi
            .iter()
            .map(|p| LedgerRow {
                scenario: self.scenario.clone(),
                param: self.param.clone(),
                value: self.value,
                phi: p.phi,
                reps: p.reps,
                rejections: p.rejections,
                rate: p.rejection_rate,
                stderr: p.mc_stderr,
                seed: self.seed,
            })
            .collect()
    }
}

/// Progress callback: `(replications done, total)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

/// Seed of replication `rep`.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, rep as u64)
}

/// Draws the two samples of one replication.
pub fn generate_replication(config: &ScenarioConfig, rep: usize) -> Result<FunctionalSample> {
    let (gx, gy) = config.generators()?;
    let grid = config.grid()?;
    let mut rng = stream_rng(replication_seed(config.seed, rep), 0);
    let xs = gx.sample(config.n, grid.as_ref(), &mut rng)?;
    let ys = gy.sample(config.m, grid.as_ref(), &mut rng)?;
    if let Some(target) = config.sincos_render_grid()? {
        let d = config.param_value(Param::D).unwrap_or(EX7_DEFAULT_D as f64) as usize;
        let frame = Frame::SinCos { d };
        let on_grid = |curves: Vec<Curve>| -> Vec<Curve> {
            curves
                .iter()
                .map(|c| Curve::Grid(render(c.values(), frame, &target)))
                .collect()
        };
        return FunctionalSample::from_groups(on_grid(xs), on_grid(ys), Some(target));
    }
    FunctionalSample::from_groups(xs, ys, grid)
}

/// One replication: fresh data, one Gram matrix, one test per φ (all φ use
/// the same permutations).
pub fn run_replication(config: &ScenarioConfig, rep: usize) -> Result<Vec<TestResult>> {
    let sample = generate_replication(config, rep)?;
    let g = gram(&sample)?;
    let perm_seed = derive_seed(replication_seed(config.seed, rep), 1);
    test_all_phi(&g, sample.labels(), &config.phi, config.b, perm_seed)
}

fn test_all_phi(
    g: &GramMatrix,
    labels: &Labels,
    phi: &[PhiKind],
    b: usize,
    seed: u64,
) -> Result<Vec<TestResult>> {
    phi.iter()
        .map(|&kind| {
            let engine = PermutationEngine::new(g, kind);
            permutation_test_engine(&engine, labels, PermutationOptions::new(b, seed))
        })
        .collect()
}

/// Test results of every replication, in replication order.
pub fn replicate_results(
    config: &ScenarioConfig,
    progress: Option<Progress<'_>>,
) -> Result<Vec<Vec<TestResult>>> {
    config.validate()?;
    let done = AtomicUsize::new(0);
    (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let out = run_replication(config, rep);
            if let Some(report) = progress {
                report(done.fetch_add(1, Ordering::Relaxed) + 1, config.reps);
            }
            out
        })
        .collect()
}

pub fn run_power(config: &ScenarioConfig) -> Result<PowerEstimate> {
    run_power_with(config, None)
}

pub fn run_power_with(config: &ScenarioConfig, progress: Option<Progress<'_>>) -> Result<PowerEstimate> {
    let results = replicate_results(config, progress)?;
    let param = config.reported_param();
    Ok(PowerEstimate {
        scenario: config.scenario.to_string(),
        param: param.to_string(),
        value: config.param_value(param).unwrap_or(f64::NAN),
        n: config.n,
        m: config.m,
        b: config.b,
        alpha: config.alpha,
        seed: config.seed,
        reps_done: results.len(),
        by_phi: aggregate(&results, &config.phi, config.alpha),
    })
}

fn aggregate(results: &[Vec<TestResult>], phi: &[PhiKind], alpha: f64) -> Vec<PhiPower> {
    phi.iter()
        .enumerate()
        .map(|(j, &kind)| {
            let rejections = results.iter().filter(|r| r[j].rejects(alpha)).count();
            PhiPower::new(kind, rejections, results.len())
        })
        .collect()
}

/// One power study per value of `param`, all sharing the base seed.
pub fn run_sweep(base: &ScenarioConfig, param: Param, values: &[f64]) -> Result<Vec<PowerEstimate>> {
    run_sweep_with(base, param, values, None)
}

pub fn run_sweep_with(
    base: &ScenarioConfig,
    param: Param,
    values: &[f64],
    progress: Option<Progress<'_>>,
) -> Result<Vec<PowerEstimate>> {
    values
        .iter()
        .map(|&v| {
            let config = base.clone().with_param(param, v)?;
            let mut est = run_power_with(&config, progress)?;
            est.param = param.to_string();
            est.value = v;
            Ok(est)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleOptions {
    /// Size of each pooled sub-sample.
    pub pooled: usize,
    /// Fraction of the sub-sample taken from the first group.
    pub proportion: f64,
    pub b: usize,
    pub alpha: f64,
    pub reps: usize,
    pub phi: Vec<PhiKind>,
    pub seed: u64,
}

/// Group sizes of a sub-sample: `round(pooled * proportion)` from the first
/// group, the rest from the second.
pub fn subsample_sizes(sample_n: usize, sample_m: usize, opts: &SubsampleOptions) -> Result<(usize, usize)> {
    if !(opts.proportion > 0.0 && opts.proportion < 1.0) {
        return Err(Error::invalid(format!(
            "proportion must lie in (0, 1), got {}",
            opts.proportion
        )));
    }
    let n = (opts.pooled as f64 * opts.proportion).round() as usize;
    let m = opts.pooled.saturating_sub(n);
    if n == 0 || m == 0 || n > sample_n || m > sample_m {
        return Err(Error::invalid(format!(
            "sub-sample of {} at proportion {} needs groups ({n}, {m}), data has ({sample_n}, {sample_m})",
            opts.pooled, opts.proportion
        )));
    }
    Ok((n, m))
}

/// Power of the test on random stratified sub-samples (drawn without
/// replacement within each group) of an observed sample. The full Gram
/// matrix is computed once and sub-sampled.
pub fn run_subsample_power(sample: &FunctionalSample, opts: &SubsampleOptions) -> Result<PowerEstimate> {
    if opts.reps == 0 || opts.b == 0 || opts.phi.is_empty() {
        return Err(Error::invalid("reps, B and the phi list must be non-empty"));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", opts.alpha)));
    }
    let (n, m) = subsample_sizes(sample.n(), sample.m(), opts)?;
    let full = gram(sample)?;
    let first: Vec<usize> = (0..sample.len()).filter(|&i| sample.labels().is_first(i)).collect();
    let second: Vec<usize> = (0..sample.len()).filter(|&i| !sample.labels().is_first(i)).collect();
    let results: Vec<Vec<TestResult>> = (0..opts.reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = replication_seed(opts.seed, rep);
            let mut rng = stream_rng(rep_seed, 0);
            let mut idx: Vec<usize> = sample_indices(&mut rng, first.len(), n)
                .into_iter()
                .map(|k| first[k])
                .collect();
            idx.extend(
                sample_indices(&mut rng, second.len(), m)
                    .into_iter()
                    .map(|k| second[k]),
            );
            let sub = full.submatrix(&idx, n, m)?;
            let labels = Labels::from_sizes(n, m)?;
            test_all_phi(&sub, &labels, &opts.phi, opts.b, derive_seed(rep_seed, 1))
        })
        .collect::<Result<_>>()?;
    Ok(PowerEstimate {
        scenario: "subsample".into(),
        param: "pooled".into(),
        value: opts.pooled as f64,
        n,
        m,
        b: opts.b,
        alpha: opts.alpha,
        seed: opts.seed,
        reps_done: results.len(),
        by_phi: aggregate(&results, &opts.phi, opts.alpha),
    })
}

/// Samples of a scenario written by `simulate`: `(first, second)` groups.
pub fn simulate(config: &ScenarioConfig) -> Result<(Vec<Curve>, Vec<Curve>)> {
    let sample = generate_replication(config, 0)?;
    Ok((
        sample.first_group().cloned().collect(),
        sample.second_group().cloned().collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: ScenarioId) -> ScenarioConfig {
        ScenarioConfig::new(id, 6, 6)
            .with_b(19)
            .with_reps(8)
            .with_seed(11)
    }

    #[test]
    fn rate_is_rejections_over_reps() {
        let est = run_power(&small(ScenarioId::Ex3)).unwrap();
        assert_eq!(est.reps_done, 8);
        for p in &est.by_phi {
            assert_eq!(p.rejection_rate, p.rejections as f64 / 8.0);
        }
    }

    #[test]
    fn single_replication_reproduces() {
        let config = small(ScenarioId::Ex1);
        let all = replicate_results(&config, None).unwrap();
        let again = run_replication(&config, 5).unwrap();
        assert_eq!(all[5], again);
    }

    #[test]
    fn empty_sweep_is_empty() {
        let config = small(ScenarioId::Ex4i);
        assert!(run_sweep(&config, Param::R, &[]).unwrap().is_empty());
    }

    #[test]
    fn sweep_labels_rows() {
        let config = small(ScenarioId::Ex4ii).with_reps(2);
        let table = run_sweep(&config, Param::R, &[0.0, 1.0]).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table[1].param, "r");
        assert_eq!(table[1].value, 1.0);
        assert_eq!(table[1].ledger_rows().len(), 3);
    }

    #[test]
    fn subsample_sizes_keep_proportion() {
        let opts = SubsampleOptions {
            pooled: 20,
            proportion: 0.3,
            b: 9,
            alpha: 0.05,
            reps: 1,
            phi: vec![PhiKind::L2],
            seed: 0,
        };
        assert_eq!(subsample_sizes(10, 20, &opts).unwrap(), (6, 14));
        assert!(subsample_sizes(5, 20, &opts).is_err());
    }

    #[test]
    fn subsample_power_runs() {
        let config = small(ScenarioId::Ex3);
        let sample = generate_replication(&config.clone().with_param(Param::N, 12.0).unwrap(), 0).unwrap();
        let opts = SubsampleOptions {
            pooled: 10,
            proportion: 0.5,
            b: 9,
            alpha: 0.1,
            reps: 4,
            phi: vec![PhiKind::L2, PhiKind::Log],
            seed: 3,
        };
        let est = run_subsample_power(&sample, &opts).unwrap();
        assert_eq!((est.n, est.m, est.reps_done), (5, 5, 4));
    }
}
