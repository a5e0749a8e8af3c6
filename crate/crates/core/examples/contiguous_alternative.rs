// Power under local mixture alternatives, where the contaminated fraction
// shrinks like `delta / sqrt(m)`.

use pbf::harness::{run_power, Param, ScenarioConfig, ScenarioId};
use pbf::statistic::PhiKind;

fn main() -> pbf::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    for delta in [0.0, 1.0, 2.0, 4.0] {
        let config = ScenarioConfig::new(ScenarioId::Ex8, 50, 50)
            .with_b(199)
            .with_reps(reps)
            .with_phi(&[PhiKind::L2, PhiKind::Exp])
            .with_seed(17)
            .with_param(Param::Delta, delta)?;
        let est = run_power(&config)?;
        println!(
            "delta = {delta:.1}: l2 {:.3}, exp {:.3}",
            est.rejection_rate(PhiKind::L2).unwrap_or(f64::NAN),
            est.rejection_rate(PhiKind::Exp).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
