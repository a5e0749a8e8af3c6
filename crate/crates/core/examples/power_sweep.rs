// Power curve of the location alternative `W` versus `r t^2 + W`.

use pbf::harness::{run_sweep, Param, ScenarioConfig, ScenarioId};

fn main() -> pbf::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let base = ScenarioConfig::new(ScenarioId::Ex4i, 30, 30)
        .with_b(199)
        .with_reps(reps)
        .with_seed(5);
    let rs = [0.0, 0.25, 0.5, 0.75, 1.0];
    println!("{:>5} {:>6} {:>6} {:>6}", "r", "l2", "exp", "log");
    for est in run_sweep(&base, Param::R, &rs)? {
        let rates: Vec<String> = est.by_phi.iter().map(|p| format!("{:6.3}", p.rejection_rate)).collect();
        println!("{:5.2} {}", est.value, rates.join(" "));
    }
    Ok(())
}
