// Empirical level of the three tests under a null scenario.
//
// Arguments: [scenario] [n] [reps]

use pbf::harness::{run_power, ScenarioConfig, ScenarioId};

fn main() -> pbf::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario: ScenarioId = args.first().and_then(|s| s.parse().ok()).unwrap_or(ScenarioId::Ex1);
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let reps: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);

    let config = ScenarioConfig::new(scenario, n, n)
        .with_b(300)
        .with_reps(reps)
        .with_seed(2024);
    let est = run_power(&config)?;
    println!("{scenario}, n = m = {n}, {reps} replications, B = 300");
    for p in &est.by_phi {
        println!("  {:<4} rate {:.3} (se {:.3})", p.phi.to_string(), p.rejection_rate, p.mc_stderr);
    }
    Ok(())
}
