//! Flux functions `(Psi, Phi)` with derivative jets up to third order.

use std::sync::Arc;

use twocons_model::FluxPair;

/// Partial derivatives `d[i][j] = d^{i+j} f / d rho^i d u^j` for `i + j <= 3`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub d: [[f64; 4]; 4],
}

impl Jet {
    pub fn value(&self) -> f64 {
        self.d[0][0]
    }
}

/// Jets of both flux components at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FluxJet {
    pub psi: Jet,
    pub phi: Jet,
}

impl FluxJet {
    /// Jacobian `[[Psi_rho, Psi_u], [Phi_rho, Phi_u]]`.
    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        [[self.psi.d[1][0], self.psi.d[0][1]], [self.phi.d[1][0], self.phi.d[0][1]]]
    }
}

/// A pair of macroscopic fluxes.
pub trait Flux: Send + Sync {
    fn eval(&self, rho: f64, u: f64) -> [f64; 2];

    /// Derivative jet; the default uses nested central differences.
    fn jet(&self, rho: f64, u: f64) -> FluxJet {
        fd_jet(&|r, v| self.eval(r, v), rho, u, 1e-3)
    }

    /// Jacobian `[[Psi_rho, Psi_u], [Phi_rho, Phi_u]]`; the default uses
    /// four central differences, which is all the solver needs.
    fn jacobian(&self, rho: f64, u: f64) -> [[f64; 2]; 2] {
        let h = 1e-6 * (1.0 + rho.abs() + u.abs());
        let (a, b) = (self.eval(rho + h, u), self.eval(rho - h, u));
        let (c, d) = (self.eval(rho, u + h), self.eval(rho, u - h));
        let k = 0.5 / h;
        [[(a[0] - b[0]) * k, (c[0] - d[0]) * k], [(a[1] - b[1]) * k, (c[1] - d[1]) * k]]
    }

    /// Whether `(rho, u)` lies in the closed admissible set.
    fn contains(&self, rho: f64, _u: f64) -> bool {
        rho >= 0.0
    }

    /// `Phi_uu(0, 0) / 2`.
    fn gamma(&self) -> f64;

    fn name(&self) -> String;
}

/// Central-difference jet with one Richardson step per order.
pub fn fd_jet(f: &dyn Fn(f64, f64) -> [f64; 2], rho: f64, u: f64, h: f64) -> FluxJet {
    // Values on a (2k+1)^2 stencil at spacing h and h/2, combined per order.
    let stencil = |h: f64| -> [[[f64; 2]; 7]; 7] {
        let mut s = [[[0.0; 2]; 7]; 7];
        for (a, row) in s.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = f(rho + (a as f64 - 3.0) * h, u + (b as f64 - 3.0) * h);
            }
        }
        s
    };
    // 1D central weights for derivative order k (second-order accurate).
    fn w(k: usize) -> [f64; 7] {
        match k {
            0 => [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            1 => [0.0, 0.0, -0.5, 0.0, 0.5, 0.0, 0.0],
            2 => [0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0],
            _ => [0.0, -0.5, 1.0, 0.0, -1.0, 0.5, 0.0],
        }
    }
    let est = |s: &[[[f64; 2]; 7]; 7], h: f64, i: usize, j: usize, c: usize| -> f64 {
        let (wi, wj) = (w(i), w(j));
        let mut acc = 0.0;
        for a in 0..7 {
            for b in 0..7 {
                acc += wi[a] * wj[b] * s[a][b][c];
            }
        }
        acc / h.powi((i + j) as i32)
    };
    let s1 = stencil(h);
    let s2 = stencil(h / 2.0);
    let mut out = FluxJet::default();
    for i in 0..4 {
        for j in 0..4 - i {
            for c in 0..2 {
                let v = if i + j == 0 {
                    s1[3][3][c]
                } else {
                    (4.0 * est(&s2, h / 2.0, i, j, c) - est(&s1, h, i, j, c)) / 3.0
                };
                if c == 0 {
                    out.psi.d[i][j] = v;
                } else {
                    out.phi.d[i][j] = v;
                }
            }
        }
    }
    out
}

/// `Psi = rho u`, `Phi = rho + gamma u^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitFlux {
    pub gamma: f64,
}

impl LimitFlux {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }
}

impl Flux for LimitFlux {
    fn eval(&self, rho: f64, u: f64) -> [f64; 2] {
        [rho * u, rho + self.gamma * u * u]
    }

    fn jet(&self, rho: f64, u: f64) -> FluxJet {
        let mut j = FluxJet::default();
        j.psi.d[0][0] = rho * u;
        j.psi.d[1][0] = u;
        j.psi.d[0][1] = rho;
        j.psi.d[1][1] = 1.0;
        j.phi.d[0][0] = rho + self.gamma * u * u;
        j.phi.d[1][0] = 1.0;
        j.phi.d[0][1] = 2.0 * self.gamma * u;
        j.phi.d[0][2] = 2.0 * self.gamma;
        j
    }

    fn jacobian(&self, rho: f64, u: f64) -> [[f64; 2]; 2] {
        [[u, rho], [1.0, 2.0 * self.gamma * u]]
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn name(&self) -> String {
        format!("limit(gamma={})", self.gamma)
    }
}

/// Closed form of the two-lane model fluxes: `Psi = rho (1 - rho) u`,
/// `Phi = (rho - gamma)(1 - u^2)` on `[0, 1] x [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLaneFlux {
    pub gamma: f64,
}

impl Flux for TwoLaneFlux {
    fn eval(&self, rho: f64, u: f64) -> [f64; 2] {
        [rho * (1.0 - rho) * u, (rho - self.gamma) * (1.0 - u * u)]
    }

    fn jet(&self, rho: f64, u: f64) -> FluxJet {
        let g = self.gamma;
        let mut j = FluxJet::default();
        j.psi.d[0][0] = rho * (1.0 - rho) * u;
        j.psi.d[1][0] = (1.0 - 2.0 * rho) * u;
        j.psi.d[0][1] = rho * (1.0 - rho);
        j.psi.d[2][0] = -2.0 * u;
        j.psi.d[1][1] = 1.0 - 2.0 * rho;
        j.psi.d[2][1] = -2.0;
        j.phi.d[0][0] = (rho - g) * (1.0 - u * u);
        j.phi.d[1][0] = 1.0 - u * u;
        j.phi.d[0][1] = -2.0 * u * (rho - g);
        j.phi.d[1][1] = -2.0 * u;
        j.phi.d[0][2] = -2.0 * (rho - g);
        j.phi.d[1][2] = -2.0;
        j
    }

    fn jacobian(&self, rho: f64, u: f64) -> [[f64; 2]; 2] {
        self.jet(rho, u).jacobian()
    }

    fn contains(&self, rho: f64, u: f64) -> bool {
        (0.0..=1.0).contains(&rho) && u.abs() <= 1.0
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn name(&self) -> String {
        format!("two-lane(gamma={})", self.gamma)
    }
}

/// Low-density rescaling with `s = n^beta`:
/// `Psi^n = s^3 Psi(rho / s^2, u / s)` and
/// `Phi^n = s^2 (Phi(rho / s^2, u / s) - Phi(0, 0))`.
///
/// Subtracting `Phi(0, 0)` only shifts a conserved flux by a constant; it makes
/// the family converge to [`LimitFlux`] when the inner flux is normalized.
#[derive(Clone)]
pub struct ScaledFlux {
    inner: Arc<dyn Flux>,
    pub n: f64,
    pub beta: f64,
    s: f64,
    phi00: f64,
}

impl ScaledFlux {
    pub fn new(inner: Arc<dyn Flux>, n: f64, beta: f64) -> Self {
        let s = n.powf(beta);
        let phi00 = inner.eval(0.0, 0.0)[1];
        Self { inner, n, beta, s, phi00 }
    }

    pub fn scale(&self) -> f64 {
        self.s
    }
}

impl Flux for ScaledFlux {
    fn eval(&self, rho: f64, u: f64) -> [f64; 2] {
        let s = self.s;
        let [a, b] = self.inner.eval(rho / (s * s), u / s);
        [s * s * s * a, s * s * (b - self.phi00)]
    }

    fn jet(&self, rho: f64, u: f64) -> FluxJet {
        let s = self.s;
        let inner = self.inner.jet(rho / (s * s), u / s);
        let mut j = FluxJet::default();
        for i in 0..4 {
            for k in 0..4 - i {
                let order = (2 * i + k) as i32;
                j.psi.d[i][k] = s.powi(3 - order) * inner.psi.d[i][k];
                j.phi.d[i][k] = s.powi(2 - order) * inner.phi.d[i][k];
            }
        }
        j.phi.d[0][0] -= s * s * self.phi00;
        j
    }

    fn jacobian(&self, rho: f64, u: f64) -> [[f64; 2]; 2] {
        let s = self.s;
        let d = self.inner.jacobian(rho / (s * s), u / s);
        [[d[0][0] * s, d[0][1] * s * s], [d[1][0], d[1][1] * s]]
    }

    fn contains(&self, rho: f64, u: f64) -> bool {
        self.inner.contains(rho / (self.s * self.s), u / self.s)
    }

    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn name(&self) -> String {
        format!("scaled[{}](n={}, beta={})", self.inner.name(), self.n, self.beta)
    }
}

/// Brute-force model fluxes; derivatives come from finite differences.
#[derive(Clone)]
pub struct ModelFlux {
    pair: Arc<FluxPair>,
}

impl ModelFlux {
    pub fn new(pair: FluxPair) -> Self {
        Self { pair: Arc::new(pair) }
    }

    pub fn pair(&self) -> &FluxPair {
        &self.pair
    }
}

impl Flux for ModelFlux {
    fn eval(&self, rho: f64, u: f64) -> [f64; 2] {
        match self.pair.psi_phi(rho, u) {
            Ok((a, b)) => [a, b],
            Err(_) => [f64::NAN, f64::NAN],
        }
    }

    fn jet(&self, rho: f64, u: f64) -> FluxJet {
        let mut j = fd_jet(&|r, v| self.eval(r, v), rho, u, 2e-3);
        // First derivatives from the model's own one-sided-aware differences.
        if let Ok(p) = self.pair.partials(rho, u) {
            j.psi.d[1][0] = p.psi_rho;
            j.psi.d[0][1] = p.psi_u;
            j.phi.d[1][0] = p.phi_rho;
            j.phi.d[0][1] = p.phi_u;
            j.phi.d[0][2] = p.phi_uu;
        }
        j
    }

    fn contains(&self, rho: f64, u: f64) -> bool {
        self.pair.domain().contains(rho, u, 1e-12)
    }

    fn gamma(&self) -> f64 {
        self.pair.gamma()
    }

    fn name(&self) -> String {
        format!("model({})", self.pair.model().name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_jets(a: &FluxJet, b: &FluxJet, tol: f64) {
        for i in 0..4 {
            for k in 0..4 - i {
                assert!((a.psi.d[i][k] - b.psi.d[i][k]).abs() < tol, "psi {i}{k}");
                assert!((a.phi.d[i][k] - b.phi.d[i][k]).abs() < tol, "phi {i}{k}");
            }
        }
    }

    #[test]
    fn closed_form_jets_match_differences() {
        let f = TwoLaneFlux { gamma: 1.7 };
        let fd = fd_jet(&|r, u| f.eval(r, u), 0.4, 0.3, 1e-2);
        close_jets(&f.jet(0.4, 0.3), &fd, 1e-8);
        let l = LimitFlux::new(2.0);
        let fd = fd_jet(&|r, u| l.eval(r, u), 0.7, -0.2, 1e-2);
        close_jets(&l.jet(0.7, -0.2), &fd, 1e-9);
    }

    #[test]
    fn scaled_jet_matches_differences() {
        let f = ScaledFlux::new(Arc::new(TwoLaneFlux { gamma: 2.0 }), 100.0, 0.4);
        let fd = fd_jet(&|r, u| f.eval(r, u), 3.0, 0.8, 1e-2);
        close_jets(&f.jet(3.0, 0.8), &fd, 1e-7);
        // Phi^n(0, 0) = 0 after the shift.
        assert_eq!(f.eval(0.0, 0.0), [0.0, 0.0]);
    }
}
