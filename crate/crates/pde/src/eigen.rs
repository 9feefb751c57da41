//! Wave speeds and eigenvectors of the flux Jacobian.

use crate::error::PdeError;
use crate::flux::Flux;

/// Eigen-decomposition of `D = [[Psi_rho, Psi_u], [Phi_rho, Phi_u]]`.
///
/// `r`, `s` are right and `l`, `m` left eigenvectors for `lambda >= mu`,
/// each of unit Euclidean length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenData {
    pub lambda: f64,
    pub mu: f64,
    pub r: [f64; 2],
    pub s: [f64; 2],
    pub l: [f64; 2],
    pub m: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
}

fn unit(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    if n == 0.0 {
        [1.0, 0.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

/// Eigenvalues of a 2x2 matrix with real spectrum, `(lambda, mu)`.
pub fn speeds(d: [[f64; 2]; 2]) -> Option<(f64, f64)> {
    let b = d[1][1] - d[0][0];
    let disc = b * b + 4.0 * d[1][0] * d[0][1];
    if disc < 0.0 {
        return None;
    }
    let tr = d[0][0] + d[1][1];
    let q = disc.sqrt();
    Some((0.5 * (tr + q), 0.5 * (tr - q)))
}

/// Decomposes a Jacobian matrix.
pub fn decompose(d: [[f64; 2]; 2], rho: f64, u: f64) -> Result<EigenData, PdeError> {
    let b = d[1][1] - d[0][0];
    let mut disc = b * b + 4.0 * d[1][0] * d[0][1];
    let scale = b * b + (4.0 * d[1][0] * d[0][1]).abs();
    if disc < 0.0 {
        if disc < -1e-14 * scale.max(1e-300) {
            return Err(PdeError::ComplexEigenvalues { rho, u, disc });
        }
        disc = 0.0;
    }
    let tr = d[0][0] + d[1][1];
    let q = disc.sqrt();
    let (lambda, mu) = (0.5 * (tr + q), 0.5 * (tr - q));
    // (D - x I) v = 0 has solutions (D01, x - D00) and (x - D11, D10);
    // the left system has (D10, x - D00) and (x - D11, D01).
    let right = |x: f64| unit([d[0][1], x - d[0][0]], [x - d[1][1], d[1][0]]);
    let left = |x: f64| unit([d[1][0], x - d[0][0]], [x - d[1][1], d[0][1]]);
    Ok(EigenData { lambda, mu, r: right(lambda), s: right(mu), l: left(lambda), m: left(mu), jacobian: d })
}

/// Eigenstructure of a flux at `(rho, u)`.
pub fn eigenstructure(flux: &dyn Flux, rho: f64, u: f64) -> Result<EigenData, PdeError> {
    decompose(flux.jet(rho, u).jacobian(), rho, u)
}

impl EigenData {
    /// Largest of `|D r - lambda r|`, `|l D - lambda l|` and the `mu` analogues.
    pub fn residual(&self) -> f64 {
        let d = self.jacobian;
        let mv = |v: [f64; 2]| [d[0][0] * v[0] + d[0][1] * v[1], d[1][0] * v[0] + d[1][1] * v[1]];
        let vm = |v: [f64; 2]| [v[0] * d[0][0] + v[1] * d[1][0], v[0] * d[0][1] + v[1] * d[1][1]];
        let err = |a: [f64; 2], v: [f64; 2], x: f64| (a[0] - x * v[0]).abs().max((a[1] - x * v[1]).abs());
        err(mv(self.r), self.r, self.lambda)
            .max(err(mv(self.s), self.s, self.mu))
            .max(err(vm(self.l), self.l, self.lambda))
            .max(err(vm(self.m), self.m, self.mu))
    }

    /// Spectral radius `max(|lambda|, |mu|)`.
    pub fn max_speed(&self) -> f64 {
        self.lambda.abs().max(self.mu.abs())
    }
}

/// Closed-form speeds of the limit system:
/// `(lambda, mu) = ((2g+1) u +- sqrt((2g-1)^2 u^2 + 4 rho)) / 2`.
pub fn limit_speeds(gamma: f64, rho: f64, u: f64) -> (f64, f64) {
    let q = ((2.0 * gamma - 1.0).powi(2) * u * u + 4.0 * rho).sqrt();
    let a = (2.0 * gamma + 1.0) * u;
    (0.5 * (a + q), 0.5 * (a - q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::LimitFlux;

    #[test]
    fn limit_examples() {
        let f = LimitFlux::new(1.0);
        let e = eigenstructure(&f, 1.0, 0.0).unwrap();
        assert!((e.lambda - 1.0).abs() < 1e-15 && (e.mu + 1.0).abs() < 1e-15);
        let e = eigenstructure(&f, 0.0, 0.3).unwrap();
        assert!((e.lambda - 0.6).abs() < 1e-15 && (e.mu - 0.3).abs() < 1e-15);
        assert!(e.residual() < 1e-15);
    }

    #[test]
    fn complex_spectrum_is_reported() {
        assert!(matches!(
            decompose([[0.0, 1.0], [-1.0, 0.0]], 0.0, 0.0),
            Err(PdeError::ComplexEigenvalues { .. })
        ));
    }

    #[test]
    fn closed_form_agrees_with_matrix() {
        for (g, r, u) in [(2.0, 0.3, 0.4), (0.2, 1.5, -0.7), (-1.0, 0.1, 0.05)] {
            let e = eigenstructure(&LimitFlux::new(g), r, u).unwrap();
            let (l, m) = limit_speeds(g, r, u);
            assert!((e.lambda - l).abs() < 1e-13 && (e.mu - m).abs() < 1e-13);
        }
    }
}
