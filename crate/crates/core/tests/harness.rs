use pbf::curves::FunctionalSample;
use pbf::harness::{
    generate_replication, run_power, run_subsample_power, run_sweep, Param, ScenarioConfig, ScenarioId,
    SubsampleOptions,
};
use pbf::simgen::{gen_basis, decaying_weights, CoeffDist};
use pbf::statistic::PhiKind;

fn small(id: ScenarioId) -> ScenarioConfig {
    ScenarioConfig::new(id, 8, 8).with_b(39).with_reps(10).with_seed(123)
}

#[test]
fn every_scenario_generates_data() {
    for id in ScenarioId::ALL {
        let mut config = small(id);
        if let Some(p) = id.param() {
            config.set_param(p, 1.0).unwrap();
        }
        let s = generate_replication(&config, 0).unwrap();
        assert_eq!((s.n(), s.m()), (8, 8), "{id}");
    }
}

#[test]
fn power_runs_are_reproducible() {
    let config = small(ScenarioId::Ex4ii).with_param(Param::R, 1.0).unwrap();
    let a = run_power(&config).unwrap();
    let b = run_power(&config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.by_phi.len(), 3);
    for p in &a.by_phi {
        assert_eq!(p.reps, 10);
        assert!((p.rejection_rate - p.rejections as f64 / 10.0).abs() < 1e-15);
    }
}

#[test]
fn sweep_rows_follow_values() {
    let base = small(ScenarioId::Ex6i).with_phi(&[PhiKind::Exp]);
    let out = run_sweep(&base, Param::D, &[1.0, 9.0]).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[1].value, 9.0);
    assert_eq!(out[1].param, "d");
}

#[test]
fn config_file_round_trip() {
    let c = ScenarioConfig::parse_kv("scenario = ex5i\nn = 12\nB = 99\nsigma = 2\nphi = exp,log\nseed = 4\n").unwrap();
    assert_eq!(c.scenario, ScenarioId::Ex5i);
    assert_eq!((c.n, c.m, c.b, c.seed), (12, 12, 99, 4));
    assert_eq!(c.phi, vec![PhiKind::Exp, PhiKind::Log]);
    assert_eq!(c.param_value(Param::Sigma), Some(2.0));
    assert!(ScenarioConfig::parse_kv("scenario = ex1\nn = 5\nbogus = 1\n").is_err());
}

#[test]
fn subsample_power_under_the_null_is_small() {
    let w = decaying_weights(9, 2.5);
    let xs = gen_basis(40, &w, CoeffDist::standard_normal(), 1).unwrap();
    let ys = gen_basis(40, &w, CoeffDist::standard_normal(), 2).unwrap();
    let sample = FunctionalSample::from_groups(xs, ys, None).unwrap();
    let opts = SubsampleOptions {
        pooled: 20,
        proportion: 0.5,
        b: 49,
        alpha: 0.05,
        reps: 30,
        phi: vec![PhiKind::Exp],
        seed: 8,
    };
    let est = run_subsample_power(&sample, &opts).unwrap();
    assert_eq!((est.n, est.m), (10, 10));
    assert!(est.by_phi[0].rejection_rate <= 0.3);
}

#[test]
fn sincos_families_render_onto_the_grid() {
    let exact = ScenarioConfig::new(ScenarioId::Ex6i, 4, 4)
        .with_seed(3)
        .with_param(Param::D, 3.0)
        .unwrap();
    let mut rendered = exact.clone();
    rendered.sincos_grid = true;
    rendered.grid_points = 2001;
    let a = generate_replication(&exact, 0).unwrap();
    let b = generate_replication(&rendered, 0).unwrap();
    assert_eq!(b.kind(), pbf::curves::ReprKind::Grid);
    assert_eq!(b.curves()[0].dim(), 2001);
    let (ga, gb) = (pbf::gram(&a).unwrap(), pbf::gram(&b).unwrap());
    for (x, y) in ga.entries().iter().zip(gb.entries()) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}
