//! Independent oracles for the entropy construction: closed-form solutions,
//! manufactured solutions of the characteristic equations and explicit
//! invariants of the limit system.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twocons_entropy::*;
use twocons_pde::{Flux, LimitFlux, TwoLaneFlux};

fn constant(c: f64) -> CoeffFn {
    Arc::new(move |_, _| c)
}

#[test]
fn cauchy_with_zero_coefficients_is_dalembert() {
    let c = CharCoeffs::zero();
    let s = |_: f64| 2.5;
    let t = |_: f64| 0.0;
    let f = solve_cauchy(&c, &CauchyData { s: &s, t: &t }, 1.7, 0.4, 40, None).unwrap();
    assert!((f - 2.5).abs() < 1e-12);
    let s = |_: f64| 0.0;
    let t = |_: f64| 1.0;
    let f = solve_cauchy(&c, &CauchyData { s: &s, t: &t }, 1.7, 0.4, 40, None).unwrap();
    assert!((f - 0.65).abs() < 1e-12);
}

/// `f = exp(0.3 w) cos z + w z^2` with variable coefficients and the matching
/// right-hand side; exercises every term of the representation formula.
#[test]
fn cauchy_reproduces_a_manufactured_solution() {
    let f = |w: f64, z: f64| (0.3 * w).exp() * z.cos() + w * z * z;
    let f_w = |w: f64, z: f64| 0.3 * (0.3 * w).exp() * z.cos() + z * z;
    let f_z = |w: f64, z: f64| -(0.3 * w).exp() * z.sin() + 2.0 * w * z;
    let f_wz = |w: f64, z: f64| -0.3 * (0.3 * w).exp() * z.sin() + 2.0 * z;
    let al = |w: f64, z: f64| 0.2 + 0.1 * (w + z).sin();
    let be = |w: f64, z: f64| 0.1 - 0.2 * (w * z).cos() + 0.05 * (w - z);
    let nu = |w: f64, z: f64| 0.1 * w * z;
    let coeffs = CharCoeffs::from_fns(Arc::new(al), Arc::new(be), Arc::new(nu), 0.0);
    let rhs = move |w: f64, z: f64| f_wz(w, z) + al(w, z) * f_w(w, z) + be(w, z) * f_z(w, z) + nu(w, z) * f(w, z);
    let s = move |v: f64| f(v, v);
    let t = move |v: f64| f_w(v, v) - f_z(v, v);
    let (w0, z0) = (1.5, 0.5);
    let mut errs = Vec::new();
    for n in [64, 128] {
        let got = solve_cauchy(&coeffs, &CauchyData { s: &s, t: &t }, w0, z0, n, Some(&rhs)).unwrap();
        errs.push((got - f(w0, z0)).abs());
    }
    assert!(errs[1] < 1e-4, "errors {errs:?}");
    assert!(errs[1] < 0.35 * errs[0], "errors {errs:?}");
}

#[test]
fn riemann_function_is_one_for_zero_coefficients() {
    let g = riemann_function(&CharCoeffs::zero(), 3.0, 0.2, 50).unwrap();
    assert!(g.solution.values.iter().filter(|v| v.is_finite()).all(|&v| v == 1.0));
}

/// Random smooth coefficient fields scaled to the contraction bounds on a
/// rectangle `[x1, x2] x [y1, y2]` with `y2 <= x1`, data on the lines through
/// `(x1, y2)`: the solution stays below five times the data.
#[test]
fn goursat_estimate_for_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 40;
    for trial in 0..100 {
        let y1 = rng.random_range(0.0..0.5);
        let y2 = y1 + rng.random_range(0.1..1.0);
        let x1 = y2 + rng.random_range(0.0..0.5);
        let x2 = x1 + rng.random_range(0.1..1.0);
        let field = |rng: &mut ChaCha8Rng| {
            let p: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            move |w: f64, z: f64| p[0] + p[1] * (p[2] * 3.0 * w + p[3]).sin() + p[4] * (p[5] * 3.0 * z + p[6]).cos() + p[7] * w * z
        };
        let (fa, fb, fc) = (field(&mut rng), field(&mut rng), field(&mut rng));
        let (dw, dz) = ((x2 - x1) / n as f64, -(y2 - y1) / n as f64);
        let node = |a: usize, b: usize| (x1 + a as f64 * dw, y2 + b as f64 * dz);
        // Grid integrals used by the certificate.
        let ia = (0..=n).map(|a| (0..=n).map(|b| fa(node(a, b).0, node(a, b).1).abs() * dz.abs()).sum::<f64>()).fold(0.0, f64::max);
        let ib = (0..=n).map(|b| (0..=n).map(|a| fb(node(a, b).0, node(a, b).1).abs() * dw).sum::<f64>()).fold(0.0, f64::max);
        let ic = (0..=n).flat_map(|a| (0..=n).map(move |b| (a, b))).map(|(a, b)| fc(node(a, b).0, node(a, b).1).abs() * dw * dz.abs()).sum::<f64>();
        let scale = rng.random_range(0.5..0.99) / 6.0;
        let (ka, kb, kc) = (scale / ia, scale / ib, scale / ic);
        let a = move |w: f64, z: f64| ka * fa(w, z);
        let b = move |w: f64, z: f64| kb * fb(w, z);
        let c = move |w: f64, z: f64| kc * fc(w, z);
        let q: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let on_w = |w: f64| q[0] + q[1] * (4.0 * (w - x1)).sin();
        let on_z = |z: f64| q[0] + q[2] * (5.0 * (y2 - z)).sin() + q[3] * (y2 - z);
        let problem = GoursatProblem {
            corner: (x1, y2),
            dw,
            dz,
            na: n,
            nb: n,
            a: &a,
            b: &b,
            c: &c,
            on_w_line: &on_w,
            on_z_line: &on_z,
            triangle: None,
        };
        let sol = problem.solve().unwrap();
        assert_eq!(sol.block, n.next_power_of_two(), "trial {trial} needed splitting");
        let big_m = (0..=n).map(|k| on_w(node(k, 0).0).abs().max(on_z(node(0, k).1).abs())).fold(0.0, f64::max);
        assert!(sol.sup_abs() <= 5.0 * big_m, "trial {trial}: {} > 5 * {big_m}", sol.sup_abs());
    }
}

#[test]
fn riemann_function_power_law_envelope() {
    let gamma = 2.0;
    for kappa in [1.0, 2.0 * gamma - 1.0, 2.0, 2.0 * gamma] {
        let coeffs = CharCoeffs::limit(gamma, kappa);
        let p = (kappa - 1.0) / (2.0 * gamma - 1.0);
        let mut c = 0.0f64;
        for w0 in [0.5, 1.0, 2.0] {
            for ratio in [0.1, 0.3, 0.6] {
                let g = riemann_function(&coeffs, w0, ratio * w0, 96).unwrap_or_else(|e| panic!("kappa {kappa} w0 {w0} ratio {ratio}: {e}"));
                for a in 0..=96 {
                    for b in 0..=(96 - a) {
                        let s = w0 - a as f64 * g.h;
                        c = c.max(g.at(a, b).abs() / (s / w0).powf(p));
                    }
                }
            }
        }
        assert!(c.is_finite() && c <= 1e3, "kappa {kappa}: envelope constant {c}");
    }
}

fn limit_table(cells: usize) -> (EntropyTable, Cutoff) {
    let (r_lo, r_hi) = (0.15, 0.15 * 4f64.exp());
    let t = build_entropy(Arc::new(LimitFlux::new(2.0)), &EntropyConfig::new(r_lo, r_hi).with_cells(cells)).unwrap();
    (t, Cutoff::new(r_lo, r_hi))
}

/// The lattice march and the Riemann-function representation are two
/// independent discretizations of the same Cauchy problems.
#[test]
fn march_agrees_with_the_riemann_representation() {
    let (t, cut) = limit_table(48);
    let axis = AxisLabel::new(2.0).unwrap();
    let lat = *t.lattice();
    let s0 = |v: f64| cut.s(axis.radius(v));
    let s1 = |v: f64| cut.ds(axis.radius(v));
    let zero = |_: f64| 0.0;
    let (s_coeffs, x_coeffs) = (CharCoeffs::limit(2.0, 0.0), CharCoeffs::limit(2.0, 1.0));
    for (i, j) in [(lat.m + 10, lat.m + 2), (lat.m + 40, lat.m + 20), (lat.m + 60, lat.m - 3)] {
        let node = t.node(i, j).unwrap();
        let (w0, z0) = (lat.v(i), lat.v(j));
        let s = solve_cauchy(&s_coeffs, &CauchyData { s: &s0, t: &zero }, w0, z0, 256, None).unwrap();
        let x = solve_cauchy(&x_coeffs, &CauchyData { s: &s1, t: &zero }, w0, z0, 256, None).unwrap();
        assert!((s - node.point.s).abs() < 2e-3 * node.point.s.abs().max(1.0), "S at ({i},{j}): {s} vs {}", node.point.s);
        assert!((x - node.point.s_rho).abs() < 2e-3, "S_rho at ({i},{j}): {x} vs {}", node.point.s_rho);
    }
}

#[test]
fn entropy_equation_residual_and_flux_compatibility() {
    let coarse = residual_check(&limit_table(48).0);
    let fine = residual_check(&limit_table(96).0);
    assert!(fine.relative < 1e-4, "{fine:?}");
    assert!(fine.relative < 0.3 * coarse.relative, "{coarse:?} -> {fine:?}");
    let compat = flux_compatibility(&limit_table(96).0);
    assert!(compat.relative < 1e-3, "{compat:?}");
}

#[test]
fn bounds_have_finite_constants_and_respect_supports() {
    let report = verify_bounds(&limit_table(48).0);
    assert_eq!(report.entries.len(), 8);
    assert!(report.all_hold(), "{report:#?}");
}

#[test]
fn characteristic_curve_keeps_z_constant() {
    let g = 2.0;
    for r in [0.01, 0.1, 0.5] {
        let curve = characteristic_curve(&LimitFlux::new(g), r, 0.5, 200).unwrap();
        assert_eq!(curve[0], (0.0, r));
        let z0 = limit_invariants(g, r, 0.0).0 .1;
        for w in curve.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        for &(u, rho) in &curve {
            assert!((limit_invariants(g, rho, u).0 .1 - z0).abs() < 1e-6, "r {r} u {u}");
        }
    }
    assert!(matches!(characteristic_curve(&LimitFlux::new(g), 0.0, 0.5, 10), Err(EntropyError::SingularStart(_))));
}

#[test]
fn partition_examples_and_sandwich() {
    let geom = CharGeometry::new(Arc::new(LimitFlux::new(2.0)), 0.2, 0.2 * 4f64.exp()).unwrap();
    let r = geom.r_lo;
    assert_eq!(geom.classify_at(0.0, 0.05, r), Region::D1);
    assert_eq!(geom.classify_at(r, 0.0, r), Region::D3);
    assert_eq!(geom.classify_at(1.5 * r, 0.0, r), Region::D2);
    assert!(geom.c1.is_finite() && geom.c2.is_finite() && geom.c2 <= geom.c1);
    for &rr in &[0.05, 0.2, 1.0] {
        for k in -20..=20 {
            let u = 0.05 * k as f64;
            let sigma = geom.sigma(u, rr).unwrap();
            if sigma > 0.0 {
                assert!(geom.sandwich_holds(rr, u, sigma, 1e-9), "r {rr} u {u}");
            }
        }
    }
    let part = DomainPartition::new(&geom);
    let pts: Vec<(f64, f64)> = (0..30).flat_map(|a| (-15..=15).map(move |b| (0.05 * a as f64, 0.08 * b as f64))).collect();
    assert!(part.nested(0.2, 0.6, &pts));
    assert!(part.inclusions_hold(0.4, &pts));
}

#[test]
fn cutoff_profile_examples() {
    let (r_lo, r_hi) = (0.3, 2.0);
    assert_eq!(cutoff_profile(r_lo, r_hi, r_lo), (0.0, 0.0));
    let (s, ds) = cutoff_profile(r_lo, r_hi, r_hi);
    assert!((s - (r_hi - (r_hi - r_lo) / (r_hi / r_lo).ln())).abs() < 1e-12 && (ds - 1.0).abs() < 1e-12);
    let (s, _) = cutoff_profile(1.0, std::f64::consts::E, std::f64::consts::E);
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn boundary_coefficient_asymptotics() {
    let gamma = 2.0;
    for kappa in [1.0, 3.0, 2.0, 4.0] {
        let c = CharCoeffs::limit(gamma, kappa);
        for w in [0.01, 0.1, 1.0] {
            let got = w * (c.beta_c)(w, 1e-8 * w);
            assert!((got - (kappa - 1.0) / (2.0 * gamma - 1.0)).abs() < 1e-4, "kappa {kappa} w {w}: {got}");
        }
    }
}

#[test]
fn scaled_two_lane_flux_converges_to_the_limit() {
    let base: Arc<dyn Flux> = Arc::new(TwoLaneFlux { gamma: 2.0 });
    let lim = LimitFlux::new(2.0);
    let mut prev = f64::INFINITY;
    for n in [1e2, 1e3, 1e4] {
        let f = twocons_pde::ScaledFlux::new(base.clone(), n, 0.4);
        let err = (f.eval(0.7, 0.3)[0] - lim.eval(0.7, 0.3)[0]).abs() + (f.eval(0.7, 0.3)[1] - lim.eval(0.7, 0.3)[1]).abs();
        assert!(err < prev);
        prev = err;
    }
    let _ = constant(0.0);
}
