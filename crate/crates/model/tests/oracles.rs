//! Closed-form and brute-force oracles for the built-in models.

use twocons_model::measure::{hessian_g, hessian_s};
use twocons_model::*;

fn interior_grid(model: &SpinModel, n: usize) -> Vec<(f64, f64)> {
    let dom = measure::model_domain(model);
    let (r0, r1, u0, u1) = dom.bounds();
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let rho = r0 + (r1 - r0) * (i as f64 + 0.5) / n as f64;
            let u = u0 + (u1 - u0) * (j as f64 + 0.5) / n as f64;
            if dom.depth(rho, u) > 1e-3 {
                pts.push((rho, u));
            }
        }
    }
    pts
}

#[test]
fn pm1_fluxes_match_closed_form() {
    let m = pm1();
    let fp = macroscopic_flux(&m).unwrap();
    let pts = interior_grid(&m, 20);
    assert!(pts.len() > 150);
    for (rho, u) in pts {
        let (a, b) = fp.psi_phi(rho, u).unwrap();
        assert!((a - rho * u).abs() < 1e-10, "Psi at ({rho},{u})");
        assert!((b - (rho + u * u)).abs() < 1e-10, "Phi at ({rho},{u})");
    }
    assert!((fp.gamma() - 1.0).abs() < 1e-4);
}

#[test]
fn two_lane_fluxes_match_closed_form() {
    for gamma in [0.3, 2.0] {
        let m = two_lane(gamma).unwrap();
        let fp = macroscopic_flux(&m).unwrap();
        for (rho, u) in interior_grid(&m, 20) {
            let (a, b) = fp.psi_phi(rho, u).unwrap();
            assert!((a - rho * (1.0 - rho) * u).abs() < 1e-10);
            assert!((b - (rho - gamma) * (1.0 - u * u)).abs() < 1e-10);
        }
        assert!((fp.gamma() - gamma).abs() < 1e-4);
    }
}

#[test]
fn gradient_of_g_is_the_mean() {
    let m = two_lane(1.3).unwrap();
    let h = 1e-5;
    for (t, th) in [(0.0, 0.0), (-1.2, 0.4), (2.0, -1.5)] {
        let p = gibbs_measure(&m, t, th);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let mo = moments(&m, &p);
        let gt = (log_partition(&m, t + h, th) - log_partition(&m, t - h, th)) / (2.0 * h);
        let gth = (log_partition(&m, t, th + h) - log_partition(&m, t, th - h)) / (2.0 * h);
        assert!((gt - mo.mean_eta).abs() < 1e-9);
        assert!((gth - mo.mean_zeta).abs() < 1e-9);
        // direct sums
        let direct_eta: f64 = (0..m.size()).map(|w| p[w] * m.eta_f(w)).sum();
        assert!((direct_eta - mo.mean_eta).abs() < 1e-12);
    }
}

#[test]
fn hessian_equals_covariance_sum() {
    let m = pm1();
    let p = invert_parameters(&m, 0.5, 0.1).unwrap();
    let h = hessian_g(&m, p.tau, p.theta);
    let law = gibbs_measure(&m, p.tau, p.theta);
    let mean_e: f64 = (0..3).map(|w| law[w] * m.eta_f(w)).sum();
    let mean_z: f64 = (0..3).map(|w| law[w] * m.zeta(w)).sum();
    let cov: f64 = (0..3).map(|w| law[w] * (m.eta_f(w) - mean_e) * (m.zeta(w) - mean_z)).sum();
    let ve: f64 = (0..3).map(|w| law[w] * (m.eta_f(w) - mean_e).powi(2)).sum();
    let vz: f64 = (0..3).map(|w| law[w] * (m.zeta(w) - mean_z).powi(2)).sum();
    assert!((h[0][0] - ve).abs() < 1e-12);
    assert!((h[0][1] - cov).abs() < 1e-12);
    assert!((h[1][1] - vz).abs() < 1e-12);
}

#[test]
fn thermo_entropy_is_legendre_dual() {
    let m = two_lane(2.0).unwrap();
    // minimum at the reference densities
    let s0 = thermo_entropy(&m, 0.5, 0.0).unwrap();
    assert!(s0.abs() < 1e-14);
    let h = 1e-5;
    let mut rng_pts = vec![];
    for i in 0..10 {
        let x = (i as f64 * 0.618_034).fract();
        let y = (i as f64 * 0.414_214).fract();
        rng_pts.push((0.1 + 0.8 * x, -0.8 + 1.6 * y));
    }
    for (rho, u) in rng_pts {
        let p = invert_parameters(&m, rho, u).unwrap();
        let sr = (thermo_entropy(&m, rho + h, u).unwrap() - thermo_entropy(&m, rho - h, u).unwrap()) / (2.0 * h);
        let su = (thermo_entropy(&m, rho, u + h).unwrap() - thermo_entropy(&m, rho, u - h).unwrap()) / (2.0 * h);
        assert!((sr - p.tau).abs() < 1e-7);
        assert!((su - p.theta).abs() < 1e-7);
        let hs = hessian_s(&m, rho, u).unwrap();
        let hg = hessian_g(&m, p.tau, p.theta);
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| hs[i][k] * hg[k][j]).sum();
                assert!((prod - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
        assert!(hs[0][0] > 0.0 && hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0] > 0.0);
    }
}

#[test]
fn onsager_on_interior_grids() {
    for m in [pm1(), two_lane(0.3).unwrap(), two_lane(2.0).unwrap()] {
        let fp = FluxPair::unchecked(&m);
        for (rho, u) in interior_grid(&m, 5) {
            let r = flux::onsager_residual_with(&fp, rho, u).unwrap();
            assert!(r < 1e-8, "{} at ({rho},{u}): {r:e}", m.name);
        }
    }
}

#[test]
fn symmetric_currents_have_zero_mean() {
    for m in [pm1(), two_lane(0.7).unwrap()] {
        let fp = FluxPair::unchecked(&m);
        for (rho, u) in interior_grid(&m, 4) {
            let (a, b) = fp.symmetric_means(rho, u).unwrap();
            assert!(a.abs() < 1e-14 && b.abs() < 1e-14);
        }
    }
}

#[test]
fn gamma_extraction_is_step_stable() {
    let fp = FluxPair::unchecked(&two_lane(1.7).unwrap());
    let (g1, _, _) = fp.corner_constants(0.1);
    let (g2, _, _) = fp.corner_constants(0.05);
    assert!((g1 - g2).abs() < 1e-4);
}

#[test]
fn csv_export_header() {
    let fp = FluxPair::unchecked(&pm1());
    let mut buf = Vec::new();
    fp.write_csv(&mut buf, &[0.2, 0.4], &[-0.1, 0.1]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("rho,u,Psi,Phi,Psi_rho,Psi_u,Phi_rho,Phi_u\n"));
    assert_eq!(text.lines().count(), 5);
}
