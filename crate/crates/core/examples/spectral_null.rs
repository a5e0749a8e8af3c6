// Null distribution of the scaled statistic: eigenvalues of the empirical
// kernel, draws from the weighted chi-square limit, and a comparison with
// the permutation distribution.

use pbf::curves::{gram, FunctionalSample, GridSpec};
use pbf::permute::{random_replicates, PermutationEngine};
use pbf::simgen::gen_wiener;
use pbf::spectrum::{sample_limit_law, spectrum_estimate};
use pbf::statistic::PhiKind;
use pbf::stats::quantile;

fn main() -> pbf::Result<()> {
    let grid = GridSpec::unit_interval(101)?;
    let n = 60;
    let xs = gen_wiener(n, &grid, 11)?;
    let ys = gen_wiener(n, &grid, 12)?;
    let sample = FunctionalSample::from_groups(xs, ys, Some(grid))?;
    let g = gram(&sample)?;
    let phi = PhiKind::Exp;

    let spec = spectrum_estimate(&g, phi, 0.5)?;
    println!("leading eigenvalues:");
    for (k, lam) in spec.eigenvalues.iter().take(6).enumerate() {
        println!("  {:>2}  {lam:.6}", k + 1);
    }
    let draws = sample_limit_law(&spec, 50_000, None, 13)?;

    let engine = PermutationEngine::new(&g, phi);
    let scale = (n * n) as f64 / (2 * n) as f64;
    let perm: Vec<f64> = random_replicates(&engine, n, 1000, 14)
        .into_iter()
        .map(|z| scale * z)
        .collect();
    for p in [0.5, 0.9, 0.95, 0.99] {
        println!(
            "q{:<4} limit {:.4}  permutation {:.4}",
            p,
            quantile(&draws, p),
            quantile(&perm, p)
        );
    }
    Ok(())
}
