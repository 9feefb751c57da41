use proptest::prelude::*;
use twocons_pde::{convex_entropy_residual, eigenstructure, limit_speeds, riemann_invariants, LimitFlux};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigen_residual_small(g in -0.5f64..4.0, rho in 0.01f64..5.0, u in -3.0f64..3.0) {
        let e = eigenstructure(&LimitFlux::new(g), rho, u).unwrap();
        prop_assert!(e.residual() <= 1e-10 * (1.0 + e.max_speed()));
        prop_assert!(e.lambda >= e.mu);
    }

    #[test]
    fn speeds_sum_to_trace(g in -0.5f64..4.0, rho in 0.0f64..5.0, u in -3.0f64..3.0) {
        let (l, m) = limit_speeds(g, rho, u);
        prop_assert!((l + m - (2.0 * g + 1.0) * u).abs() < 1e-10 * (1.0 + u.abs()));
        prop_assert!((l * m - (2.0 * g * u * u - rho)).abs() < 1e-9 * (1.0 + rho + u * u));
    }

    #[test]
    fn invariants_reflect(g in 0.8f64..4.0, rho in 0.0f64..5.0, u in -3.0f64..3.0) {
        let (w, z) = riemann_invariants(g, rho, u).unwrap();
        let (w2, z2) = riemann_invariants(g, rho, -u).unwrap();
        prop_assert!((w - z2).abs() < 1e-12 * (1.0 + w.abs()));
        prop_assert!((z - w2).abs() < 1e-12 * (1.0 + z.abs()));
        prop_assert!(w >= 0.0 && z >= 0.0);
    }

    #[test]
    fn invariants_increase_in_rho(g in 0.8f64..4.0, rho in 0.01f64..5.0, u in -3.0f64..3.0) {
        let (w, z) = riemann_invariants(g, rho, u).unwrap();
        let (w1, z1) = riemann_invariants(g, rho * 1.01, u).unwrap();
        prop_assert!(w1 > w && z1 > z);
    }

    #[test]
    fn convex_entropy_solves_lax_equation(g in -2.0f64..4.0, rho in 0.01f64..5.0, u in -3.0f64..3.0) {
        prop_assert!(convex_entropy_residual(g, rho, u).abs() < 1e-12);
    }
}
