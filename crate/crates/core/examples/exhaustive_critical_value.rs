// Exact permutation p-value and critical value for tiny samples, where all
// group assignments can be enumerated.

use pbf::curves::{gram, Curve, FunctionalSample};
use pbf::permute::{assignment_count, critical_value, exhaustive_test};
use pbf::statistic::PhiKind;

fn main() -> pbf::Result<()> {
    let xs = [[0.1, 0.3], [0.4, -0.2], [0.0, 0.5], [0.2, 0.1]];
    let ys = [[1.2, 0.9], [0.8, 1.4], [1.1, 0.6], [1.5, 1.0]];
    let sample = FunctionalSample::from_groups(
        xs.iter().map(|v| Curve::Coeff(v.to_vec())).collect(),
        ys.iter().map(|v| Curve::Coeff(v.to_vec())).collect(),
        None,
    )?;
    let g = gram(&sample)?;
    println!("{} assignments", assignment_count(4, 4));
    for phi in [PhiKind::L2, PhiKind::Exp, PhiKind::Log] {
        let r = exhaustive_test(&g, sample.labels(), phi, 10_000)?;
        let c = critical_value(&g, sample.labels(), phi, 0.05, 10_000, 0)?;
        println!(
            "{:<4} zeta = {:.5}  exact p = {:.4}  critical value = {:.5}  reject = {}",
            phi.to_string(),
            r.zeta_hat,
            r.p_value,
            c.value,
            r.zeta_hat > c.value
        );
    }
    Ok(())
}
