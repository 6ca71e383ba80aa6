use proptest::prelude::*;
use tagsep::kernel::{
    linear_moment_speed, simple_exclusion_kernel, speed, total_rate_per_site, ModelParams,
    RateKernel,
};

fn kernel() -> impl Strategy<Value = RateKernel> {
    (0.01f64..1.0, prop::collection::vec(0.0f64..1.0, 0..3)).prop_map(|(p1, rest)| {
        let mut entries = vec![(1, p1)];
        entries.extend(rest.into_iter().enumerate().map(|(k, p)| (k as u32 + 2, p)));
        RateKernel::new(entries).unwrap()
    })
}

proptest! {
    #[test]
    fn speed_is_linear_in_vacancy(d in 2u32..6, k in kernel(), rho in 0.0f64..=1.0) {
        let at = |r| speed(&ModelParams::new(d, r, k.clone()).unwrap());
        prop_assert!((at(rho) - (1.0 - rho) * at(0.0)).abs() < 1e-12 * (1.0 + at(0.0).abs()));
    }

    #[test]
    fn total_rate_is_monotone(d in 2u32..6, k in kernel(), bump in 0.001f64..1.0, slot in 0usize..3) {
        let base = ModelParams::new(d, 0.5, k.clone()).unwrap();
        let mut entries = k.entries().to_vec();
        let slot = slot.min(entries.len() - 1);
        entries[slot].1 += bump;
        let bigger = ModelParams::new(d, 0.5, RateKernel::new(entries).unwrap()).unwrap();
        prop_assert!(total_rate_per_site(&bigger) > total_rate_per_site(&base));
    }

    #[test]
    fn line_has_zero_speed(k in kernel(), rho in 0.0f64..=1.0) {
        prop_assert!(speed(&ModelParams::new(2, rho, k).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn simple_exclusion_speed_closed_form() {
    for d in 2..=6u32 {
        for rho in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let m = ModelParams::new(d, rho, simple_exclusion_kernel(d).unwrap()).unwrap();
            let want = (1.0 - rho) * (d as f64 - 2.0) / d as f64;
            assert!((speed(&m) - want).abs() < 1e-15);
            assert!((linear_moment_speed(&m) - want).abs() < 1e-15);
        }
    }
}
