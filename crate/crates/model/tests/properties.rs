//! Property tests over random parameters.

use proptest::prelude::*;
use twocons_model::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gibbs_is_probability_and_round_trips(tau in -4.0..4.0f64, theta in -3.0..3.0f64, g in -2.0..3.0f64) {
        let m = two_lane(g).unwrap();
        let p = gibbs_measure(&m, tau, theta);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let mo = moments(&m, &p);
        if measure::model_domain(&m).depth(mo.mean_eta, mo.mean_zeta) > 1e-6 {
            let back = invert_parameters(&m, mo.mean_eta, mo.mean_zeta).unwrap();
            let q = gibbs_measure(&m, back.tau, back.theta);
            let mo2 = moments(&m, &q);
            prop_assert!((mo2.mean_eta - mo.mean_eta).abs() < 1e-10);
            prop_assert!((mo2.mean_zeta - mo.mean_zeta).abs() < 1e-10);
        }
    }

    #[test]
    fn flux_parity(rho in 0.02..0.9f64, frac in -0.95..0.95f64) {
        for m in [pm1(), two_lane(1.5).unwrap()] {
            let u = if m.name == "pm1" { frac * (1.0 - rho) } else { frac };
            let fp = FluxPair::unchecked(&m);
            let (a, b) = fp.psi_phi(rho, u).unwrap();
            let (a2, b2) = fp.psi_phi(rho, -u).unwrap();
            prop_assert!((a + a2).abs() < 1e-12);
            prop_assert!((b - b2).abs() < 1e-12);
            prop_assert!(fp.psi(rho, 0.0).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn cycle_identity_for_two_lane(g in -5.0..5.0f64) {
        let m = two_lane(g).unwrap();
        prop_assert!(conditions::cycle_residual(&m) < 1e-12);
        prop_assert!(conditions::reversibility_residual(&m) < 1e-12);
        prop_assert!(conditions::lr_symmetry_residual(&m) < 1e-12);
    }

    #[test]
    fn sampled_pi_onsager_at_zero_slope(rho in 0.05..0.9f64) {
        let fp = FluxPair::unchecked(&pm1());
        prop_assert!(flux::onsager_residual_with(&fp, rho, 0.0).unwrap() < 1e-8);
    }
}
