mod common;

use common::*;
use pbf::curves::{gram, GridSpec, Labels};
use pbf::permute::{permuted_statistic, PermutationEngine};
use pbf::statistic::{pbf_statistic, PhiKind};
use proptest::prelude::*;

fn phi_strategy() -> impl Strategy<Value = PhiKind> {
    prop_oneof![Just(PhiKind::L2), Just(PhiKind::Exp), Just(PhiKind::Log)]
}

fn vectors(count: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), count)
}

fn coeff_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, PhiKind)> {
    (1usize..=12, 1usize..=12, 1usize..=6, phi_strategy()).prop_flat_map(|(n, m, d, phi)| {
        (vectors(n, d), vectors(m, d), Just(phi))
    })
}

fn grid_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, usize, PhiKind)> {
    (1usize..=12, 1usize..=12, 3usize..=15, phi_strategy()).prop_flat_map(|(n, m, len, phi)| {
        (vectors(n, len), vectors(m, len), Just(len), Just(phi))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn coefficient_samples_match_oracle((xs, ys, phi) in coeff_case()) {
        let sample = coeff_sample(&xs, &ys);
        let g = gram(&sample).unwrap();
        let got = pbf_statistic(&g, sample.labels(), phi).unwrap().zeta_hat;
        let all: Vec<Vec<f64>> = xs.iter().chain(&ys).cloned().collect();
        let want = pbf_statistic_oracle(&dot_gram(&all), xs.len(), ys.len(), phi);
        prop_assert!(close(got, want, 1e-10), "got {got}, oracle {want}");
    }

    #[test]
    fn grid_samples_match_oracle((xs, ys, len, phi) in grid_case()) {
        let grid = GridSpec::unit_interval(len).unwrap();
        let sample = grid_sample(&xs, &ys, &grid);
        let g = gram(&sample).unwrap();
        let got = pbf_statistic(&g, sample.labels(), phi).unwrap().zeta_hat;
        let all: Vec<Vec<f64>> = xs.iter().chain(&ys).cloned().collect();
        let want = pbf_statistic_oracle(&trapezoid_gram(&all, grid.points()), xs.len(), ys.len(), phi);
        prop_assert!(close(got, want, 1e-10), "got {got}, oracle {want}");
    }

    #[test]
    fn engine_matches_oracle_under_relabeling(
        (xs, ys, phi) in coeff_case(),
        seed in any::<u64>(),
    ) {
        let sample = coeff_sample(&xs, &ys);
        let g = gram(&sample).unwrap();
        let dim = g.dim();
        // a deterministic shuffle of the labels
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut s = seed;
        for i in (1..dim).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let labels = sample.labels().permuted(&perm).unwrap();
        let engine = PermutationEngine::new(&g, phi);
        let got = engine.statistic(&labels).unwrap().zeta_hat;
        let via_helper = permuted_statistic(&g, &labels, phi).unwrap();
        let all: Vec<Vec<f64>> = xs.iter().chain(&ys).cloned().collect();
        let (rows, n, m) = reorder_by_labels(&dot_gram(&all), &labels);
        let want = pbf_statistic_oracle(&rows, n, m, phi);
        prop_assert!(close(got, want, 1e-10), "engine {got}, oracle {want}");
        prop_assert!(close(via_helper, want, 1e-10));
    }
}

#[test]
fn hand_value_constant_versus_identity() {
    let rows = vec![vec![1.0, 0.5], vec![0.5, 1.0 / 3.0]];
    let g = gram_from_rows(&rows, 1, 1);
    let v = pbf_statistic(&g, &Labels::from_sizes(1, 1).unwrap(), PhiKind::L2).unwrap();
    assert!((v.zeta_hat - 1.0 / 3.0).abs() < 1e-12);
    assert!((v.scaled - 1.0 / 6.0).abs() < 1e-12);
    assert!((pbf_statistic_oracle(&rows, 1, 1, PhiKind::L2) - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn statistic_is_nonnegative_on_random_data() {
    for (k, phi) in phi_kinds().into_iter().enumerate() {
        let xs: Vec<Vec<f64>> = (0..7).map(|i| vec![(i * 3 + k) as f64 % 5.0, i as f64]).collect();
        let ys: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, -(i as f64)]).collect();
        let sample = coeff_sample(&xs, &ys);
        let g = gram(&sample).unwrap();
        assert!(pbf_statistic(&g, sample.labels(), phi).unwrap().zeta_hat >= -1e-12);
    }
}
