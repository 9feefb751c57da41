//! Canonical (Gibbs) measures, their inversion and the thermodynamic entropy.

use crate::error::NumericError;
use crate::model::SpinModel;

/// Canonical parameters together with the densities they produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalParams {
    pub tau: f64,
    pub theta: f64,
    pub rho: f64,
    pub u: f64,
    /// Log moment generating function `G(tau, theta)`.
    pub g: f64,
}

/// First and second moments of `(eta, zeta)` under a site law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_eta: f64,
    pub mean_zeta: f64,
    pub var_eta: f64,
    pub var_zeta: f64,
    pub cov: f64,
}

impl Moments {
    /// Covariance matrix, which is also the Hessian of `G`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.var_eta, self.cov], [self.cov, self.var_zeta]]
    }
}

/// `G(tau, theta) = log sum pi(w) exp(tau eta + theta zeta)`.
pub fn log_partition(model: &SpinModel, tau: f64, theta: f64) -> f64 {
    let k = model.size();
    let e: Vec<f64> = (0..k).map(|w| tau * model.eta_f(w) + theta * model.zeta(w)).collect();
    let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = (0..k).map(|w| model.pi_ref[w] * (e[w] - m).exp()).sum();
    m + s.ln()
}

/// The tilted site law `pi(w) exp(tau eta + theta zeta - G)`.
pub fn gibbs_measure(model: &SpinModel, tau: f64, theta: f64) -> Vec<f64> {
    let k = model.size();
    let e: Vec<f64> = (0..k).map(|w| tau * model.eta_f(w) + theta * model.zeta(w)).collect();
    let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = (0..k).map(|w| model.pi_ref[w] * (e[w] - m).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

/// Moments of `(eta, zeta)` under the site law `p`.
pub fn moments(model: &SpinModel, p: &[f64]) -> Moments {
    let (mut me, mut mz) = (0.0, 0.0);
    for (w, &pw) in p.iter().enumerate() {
        me += pw * model.eta_f(w);
        mz += pw * model.zeta(w);
    }
    let (mut ve, mut vz, mut c) = (0.0, 0.0, 0.0);
    for (w, &pw) in p.iter().enumerate() {
        let de = model.eta_f(w) - me;
        let dz = model.zeta(w) - mz;
        ve += pw * de * de;
        vz += pw * dz * dz;
        c += pw * de * dz;
    }
    Moments { mean_eta: me, mean_zeta: mz, var_eta: ve, var_zeta: vz, cov: c }
}

/// Solves `grad G(tau, theta) = (rho, u)` by damped Newton iteration.
pub fn invert_parameters(model: &SpinModel, rho: f64, u: f64) -> Result<CanonicalParams, NumericError> {
    if !model_domain(model).contains_interior(rho, u) {
        return Err(NumericError::OutOfDomain { rho, u });
    }
    let (mut tau, mut theta) = (0.0_f64, 0.0_f64);
    let mut residual = f64::INFINITY;
    'newton: for _ in 0..100 {
        let p = gibbs_measure(model, tau, theta);
        let mo = moments(model, &p);
        let g = [mo.mean_eta - rho, mo.mean_zeta - u];
        residual = g[0].abs().max(g[1].abs());
        if residual < 1e-14 {
            return Ok(CanonicalParams { tau, theta, rho, u, g: log_partition(model, tau, theta) });
        }
        let h = mo.matrix();
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det <= 0.0 || !det.is_finite() {
            break;
        }
        let dt = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dth = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        // Backtrack on the gradient norm; the objective itself is too flat
        // near the optimum to resolve in floating point.
        let mut step = 1.0;
        loop {
            let (nt, nth) = (tau + step * dt, theta + step * dth);
            let mo1 = moments(model, &gibbs_measure(model, nt, nth));
            let r1 = (mo1.mean_eta - rho).abs().max((mo1.mean_zeta - u).abs());
            if r1 < residual {
                tau = nt;
                theta = nth;
                break;
            }
            if step < 1e-6 {
                if residual < 1e-12 {
                    break 'newton;
                }
                tau = nt;
                theta = nth;
                break;
            }
            step *= 0.5;
        }
    }
    let p = gibbs_measure(model, tau, theta);
    let mo = moments(model, &p);
    let final_res = (mo.mean_eta - rho).abs().max((mo.mean_zeta - u).abs());
    if final_res < 1e-11 {
        return Ok(CanonicalParams { tau, theta, rho, u, g: log_partition(model, tau, theta) });
    }
    Err(NumericError::NonConvergence { iterations: 100, residual: residual.min(final_res) })
}

/// Site law `pi_{rho,u}`.
pub fn site_law(model: &SpinModel, rho: f64, u: f64) -> Result<Vec<f64>, NumericError> {
    let p = invert_parameters(model, rho, u)?;
    Ok(gibbs_measure(model, p.tau, p.theta))
}

/// Hessian `G''(tau, theta)`.
pub fn hessian_g(model: &SpinModel, tau: f64, theta: f64) -> [[f64; 2]; 2] {
    moments(model, &gibbs_measure(model, tau, theta)).matrix()
}

/// Thermodynamic entropy `S(rho, u) = rho tau + u theta - G(tau, theta)`.
pub fn thermo_entropy(model: &SpinModel, rho: f64, u: f64) -> Result<f64, NumericError> {
    let p = invert_parameters(model, rho, u)?;
    Ok(rho * p.tau + u * p.theta - p.g)
}

/// Hessian `S''(rho, u)`, the inverse of `G''` at the dual point.
pub fn hessian_s(model: &SpinModel, rho: f64, u: f64) -> Result<[[f64; 2]; 2], NumericError> {
    let p = invert_parameters(model, rho, u)?;
    let h = hessian_g(model, p.tau, p.theta);
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    Ok([[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]])
}

/// The admissible polygon: convex hull of `(eta, zeta)` over site states.
pub fn model_domain(model: &SpinModel) -> crate::domain::Domain {
    let pts: Vec<(f64, f64)> = (0..model.size()).map(|w| (model.eta_f(w), model.zeta(w))).collect();
    crate::domain::Domain::hull(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pm1, two_lane};

    #[test]
    fn origin_parameters_give_reference_measure() {
        let m = two_lane(0.7).unwrap();
        assert_eq!(gibbs_measure(&m, 0.0, 0.0), m.pi_ref);
        assert_eq!(log_partition(&m, 0.0, 0.0), 0.0);
    }

    #[test]
    fn pm1_marginals() {
        let m = pm1();
        let p = site_law(&m, 0.6, 0.2).unwrap();
        // states are ordered (-1, 0, +1)
        assert!((p[1] - 0.6).abs() < 1e-12);
        assert!((p[2] - 0.3).abs() < 1e-12);
        assert!((p[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn boundary_rejected() {
        let m = pm1();
        assert_eq!(invert_parameters(&m, 1.0, 0.0), Err(NumericError::OutOfDomain { rho: 1.0, u: 0.0 }));
        assert!(invert_parameters(&m, 0.0, 0.5).is_err());
    }

    #[test]
    fn entropy_hessian_inverts_covariance() {
        let m = two_lane(2.0).unwrap();
        let (rho, u) = (0.3, -0.4);
        let p = invert_parameters(&m, rho, u).unwrap();
        let g = hessian_g(&m, p.tau, p.theta);
        let s = hessian_s(&m, rho, u).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| s[i][k] * g[k][j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((prod - id).abs() < 1e-12);
            }
        }
    }
}
