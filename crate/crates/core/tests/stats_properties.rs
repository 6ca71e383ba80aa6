use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tagsep::sim::TrajectorySample;
use tagsep::stats::{
    clt_diagnostic, ks_standard_normal, linear_fit, mean_ci, speed_estimate, variance_growth,
};

fn reversed<T: Clone>(xs: &[T]) -> Vec<T> {
    xs.iter().rev().cloned().collect()
}

fn rotated<T: Clone>(xs: &[T], k: usize) -> Vec<T> {
    let mut v = xs.to_vec();
    let n = v.len();
    v.rotate_left(k % n);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimators_ignore_sample_order(
        xs in prop::collection::vec(-50.0f64..50.0, 600..700),
        k in 0usize..600,
    ) {
        let perm = rotated(&reversed(&xs), k);
        let a = mean_ci(&xs).unwrap();
        let b = mean_ci(&perm).unwrap();
        prop_assert!((a.mean - b.mean).abs() < 1e-9 && (a.se - b.se).abs() < 1e-9);
        prop_assert_eq!(ks_standard_normal(&xs), ks_standard_normal(&perm));
        let c1 = clt_diagnostic(&xs, 10.0, 0.1, 3, 5).unwrap();
        let c2 = clt_diagnostic(&perm, 10.0, 0.1, 3, 5).unwrap();
        prop_assert_eq!(c1.ks_distance, c2.ks_distance);
        prop_assert_eq!(c1.sigma2_se, c2.sigma2_se);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let g1 = variance_growth(&xs, &ys, 1.0, 4.0, false, 3).unwrap();
        let g2 = variance_growth(&perm, &rotated(&ys, 7), 1.0, 4.0, false, 3).unwrap();
        prop_assert_eq!(g1.ci95, g2.ci95);
        let pairs_a = variance_growth(&xs, &ys, 1.0, 4.0, true, 3).unwrap();
        let pairs_b = variance_growth(&rotated(&xs, k), &rotated(&ys, k), 1.0, 4.0, true, 3).unwrap();
        prop_assert_eq!(pairs_a.ci95, pairs_b.ci95);
    }

    #[test]
    fn fit_ignores_point_order(
        pts in prop::collection::vec((0.0f64..100.0, -10.0f64..10.0, 0.1f64..2.0), 3..12),
    ) {
        prop_assume!(pts.iter().map(|p| (p.0 * 1e6) as i64).collect::<std::collections::BTreeSet<_>>().len() >= 3);
        if let (Ok(a), Ok(b)) = (linear_fit(&pts), linear_fit(&reversed(&pts))) {
            prop_assert!((a.slope - b.slope).abs() < 1e-9 * (1.0 + a.slope.abs()));
            prop_assert!((a.intercept - b.intercept).abs() < 1e-7 * (1.0 + a.intercept.abs()));
        }
    }

    #[test]
    fn studentization_undoes_location_shifts(
        xs in prop::collection::vec(-20i64..20, 500..520),
        shift in -1000i64..1000,
    ) {
        let t = 4.0;
        let v = 0.25;
        let a: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let b: Vec<f64> = xs.iter().map(|&x| (x + shift) as f64).collect();
        let ra = clt_diagnostic(&a, t, v, 3, 1).unwrap();
        let rb = clt_diagnostic(&b, t, v + shift as f64 / t, 3, 1).unwrap();
        prop_assert!((ra.ks_distance.unwrap() - rb.ks_distance.unwrap()).abs() < 1e-12);
        prop_assert!((ra.ks_distance_self_centred.unwrap() - rb.ks_distance_self_centred.unwrap()).abs() < 1e-12);
        prop_assert!((ra.sigma2 - rb.sigma2).abs() < 1e-9 * ra.sigma2.max(1.0));
    }
}

#[test]
fn speed_estimate_is_calibrated() {
    let (t, v): (f64, f64) = (50.0, 0.2);
    let noise = Normal::new(0.0, 4.0).unwrap();
    let mut covered = 0;
    let trials = 1000;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<TrajectorySample> = (0..200)
            .map(|_| {
                let h = (v * t + noise.sample(&mut rng)).round() as i64;
                TrajectorySample {
                    t,
                    horo: h,
                    depth: h.unsigned_abs() as u32,
                    ..TrajectorySample::initial()
                }
            })
            .collect();
        // Rounding to integers keeps the mean: v t is an integer here.
        if speed_estimate(&samples, v).unwrap().horo.zscore.abs() < 3.0 {
            covered += 1;
        }
    }
    assert!(covered >= 990, "{covered}/{trials}");
}
