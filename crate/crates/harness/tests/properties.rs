use proptest::prelude::*;
use twocons_harness::tails::{gaussian_tail, poisson_tail, wilson};
use twocons_harness::{ExperimentConfig, TestFn};

proptest! {
    #[test]
    fn wilson_interval_contains_the_point_estimate(n in 1usize..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as usize;
        let (lo, hi) = wilson(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12);
        prop_assert!(p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn poisson_tail_is_nonincreasing(l in 0.1f64..200.0, y in 0.0f64..400.0, dy in 0.0f64..50.0) {
        let (a, b) = (poisson_tail(l, y), poisson_tail(l, y + dy));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn gaussian_tail_is_a_probability(y in -10.0f64..40.0, dy in 0.0f64..5.0) {
        let (a, b) = (gaussian_tail(y), gaussian_tail(y + dy));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn basis_has_one_plus_two_per_mode(modes in 0usize..20) {
        let b = TestFn::basis(modes);
        prop_assert_eq!(b.len(), 1 + 2 * modes);
        prop_assert_eq!(b[0], TestFn::One);
        for f in &b {
            prop_assert!(f.eval(0.3).abs() <= 1.0);
        }
    }
}

#[test]
fn presets_validate() {
    for cfg in [ExperimentConfig::eulerian_default(), ExperimentConfig::intermediate_default()] {
        assert!(cfg.validate().is_ok());
    }
}
