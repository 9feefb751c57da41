//! Coefficients of the Lax entropy equation, of the equations satisfied by the
//! partial derivatives of a solution, and their characteristic form.
//!
//! With `a = Psi_u`, `b = Phi_u - Psi_rho`, `c = -Phi_rho` the entropy equation
//! is `P[S] = a S_rr + b S_ru + c S_uu = 0`. Each unknown `f` in
//! `{S, S_rho, S_u, S_rr, S_ru}` solves
//! `P[f] + A f_rho + B f_u + G f + H g = 0`, where `g` is the partner field
//! (`S_ru` for `S_rr` and vice versa). In invariant coordinates this becomes
//! `f_wz + alpha f_w + beta f_z + nu f + eta g = 0`.

use std::sync::Arc;

use twocons_pde::{Flux, FluxJet, LimitFlux};

use crate::geometry::{limit_invariants, limit_inverse};

/// The five unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unknown {
    S,
    SRho,
    SU,
    SRhoRho,
    SRhoU,
}

impl Unknown {
    pub const ALL: [Unknown; 5] = [Unknown::S, Unknown::SRho, Unknown::SU, Unknown::SRhoRho, Unknown::SRhoU];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The field coupled through the zero-order term, if any.
    pub fn partner(self) -> Option<Unknown> {
        match self {
            Unknown::SRhoRho => Some(Unknown::SRhoU),
            Unknown::SRhoU => Some(Unknown::SRhoRho),
            _ => None,
        }
    }
}

/// `a, b, c` and their derivatives up to second order in `rho` (first in `u`
/// for the `rho`-derivatives).
#[derive(Debug, Clone, Copy, Default)]
pub struct LaxTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_r: f64,
    pub a_u: f64,
    pub b_r: f64,
    pub b_u: f64,
    pub c_r: f64,
    pub c_u: f64,
    pub a_rr: f64,
    pub a_ru: f64,
    pub b_rr: f64,
    pub b_ru: f64,
    pub c_rr: f64,
    pub c_ru: f64,
}

pub fn lax_terms(j: &FluxJet) -> LaxTerms {
    let (p, f) = (&j.psi.d, &j.phi.d);
    LaxTerms {
        a: p[0][1],
        b: f[0][1] - p[1][0],
        c: -f[1][0],
        a_r: p[1][1],
        a_u: p[0][2],
        b_r: f[1][1] - p[2][0],
        b_u: f[0][2] - p[1][1],
        c_r: -f[2][0],
        c_u: -f[1][1],
        a_rr: p[2][1],
        a_ru: p[1][2],
        b_rr: f[2][1] - p[3][0],
        b_ru: f[1][2] - p[2][1],
        c_rr: -f[3][0],
        c_ru: -f[2][1],
    }
}

/// Lower-order coefficients `(A, B, G, H)` of one differentiated equation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EquationTerms {
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub h: f64,
}

/// `(A, B, G, H)` for each unknown, indexed by [`Unknown::index`].
pub fn equation_terms(t: &LaxTerms) -> [EquationTerms; 5] {
    let LaxTerms { a, b, c, a_r, a_u, b_r, b_u, c_r, c_u, a_rr, a_ru, b_rr, b_ru, c_rr, c_ru } = *t;
    let a1 = a_r - a * c_r / c;
    let b1 = b_r - b * c_r / c;
    let a1_r = a_rr - (a_r * c_r + a * c_rr) / c + a * c_r * c_r / (c * c);
    let a1_u = a_ru - (a_u * c_r + a * c_ru) / c + a * c_r * c_u / (c * c);
    let b1_r = b_rr - (b_r * c_r + b * c_rr) / c + b * c_r * c_r / (c * c);
    let b1_u = b_ru - (b_u * c_r + b * c_ru) / c + b * c_r * c_u / (c * c);
    let a2 = b_u - b * a_u / a;
    let b2 = c_u - c * a_u / a;
    [
        EquationTerms::default(),
        EquationTerms { a: a1, b: b1, g: 0.0, h: 0.0 },
        EquationTerms { a: a2, b: b2, g: 0.0, h: 0.0 },
        EquationTerms { a: 2.0 * a1, b: 2.0 * b1, g: a1_r - a1 * c_r / c, h: b1_r - b1 * c_r / c },
        EquationTerms { a: a1 + a2, b: b1 + b2, g: b1_u - b1 * a_u / a, h: a1_u - a1 * a_u / a },
    ]
}

/// Eigenvalues `lambda > mu` of the flux Jacobian with their gradients.
#[derive(Debug, Clone, Copy)]
pub struct SpeedJet {
    pub lambda: f64,
    pub mu: f64,
    pub lambda_grad: [f64; 2],
    pub mu_grad: [f64; 2],
}

pub fn speed_jet(j: &FluxJet) -> SpeedJet {
    let (p, f) = (&j.psi.d, &j.phi.d);
    let tr = p[1][0] + f[0][1];
    let det = p[1][0] * f[0][1] - p[0][1] * f[1][0];
    let tr_g = [p[2][0] + f[1][1], p[1][1] + f[0][2]];
    let det_g = [
        p[2][0] * f[0][1] + p[1][0] * f[1][1] - p[1][1] * f[1][0] - p[0][1] * f[2][0],
        p[1][1] * f[0][1] + p[1][0] * f[0][2] - p[0][2] * f[1][0] - p[0][1] * f[1][1],
    ];
    let q = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let q_g = [(tr * tr_g[0] - 2.0 * det_g[0]) / q, (tr * tr_g[1] - 2.0 * det_g[1]) / q];
    SpeedJet {
        lambda: 0.5 * (tr + q),
        mu: 0.5 * (tr - q),
        lambda_grad: [0.5 * (tr_g[0] + q_g[0]), 0.5 * (tr_g[1] + q_g[1])],
        mu_grad: [0.5 * (tr_g[0] - q_g[0]), 0.5 * (tr_g[1] - q_g[1])],
    }
}

/// A point with the gradients of both invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeom {
    pub rho: f64,
    pub u: f64,
    pub w_rho: f64,
    pub w_u: f64,
    pub z_rho: f64,
    pub z_u: f64,
}

impl PointGeom {
    pub fn jacobian(&self) -> f64 {
        self.w_rho * self.z_u - self.w_u * self.z_rho
    }

    /// `(rho_w, u_w, rho_z, u_z)`.
    pub fn inverse(&self) -> [f64; 4] {
        let j = self.jacobian();
        [self.z_u / j, -self.z_rho / j, -self.w_u / j, self.w_rho / j]
    }

    /// Mirror image `u -> -u`, which swaps the invariants.
    pub fn mirrored(&self) -> Self {
        Self { rho: self.rho, u: -self.u, w_rho: self.z_rho, w_u: -self.z_u, z_rho: self.w_rho, z_u: -self.w_u }
    }

    /// Explicit geometry of the limit system.
    pub fn limit(gamma: f64, rho: f64, u: f64) -> Self {
        let (_, gw, gz) = limit_invariants(gamma, rho, u);
        Self { rho, u, w_rho: gw[0], w_u: gw[1], z_rho: gz[0], z_u: gz[1] }
    }
}

/// Characteristic coefficients of one equation at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoeffSet {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub eta: f64,
}

/// Characteristic coefficients of all five equations at a point.
pub fn char_coefficients(flux: &dyn Flux, g: &PointGeom) -> [CoeffSet; 5] {
    let jet = flux.jet(g.rho, g.u);
    let terms = equation_terms(&lax_terms(&jet));
    let sp = speed_jet(&jet);
    let [rho_w, u_w, rho_z, u_z] = g.inverse();
    let gap = sp.lambda - sp.mu;
    let lambda_z = sp.lambda_grad[0] * rho_z + sp.lambda_grad[1] * u_z;
    let mu_w = sp.mu_grad[0] * rho_w + sp.mu_grad[1] * u_w;
    let k = -gap * g.jacobian();
    let mut out = [CoeffSet::default(); 5];
    for (o, t) in out.iter_mut().zip(terms.iter()) {
        o.alpha = (lambda_z - t.a * u_z + t.b * rho_z) / gap;
        o.beta = -(mu_w - t.a * u_w + t.b * rho_w) / gap;
        o.nu = t.g / k;
        o.eta = t.h / k;
    }
    out
}

pub type CoeffFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Coefficients `alpha, beta, nu` of `f_wz + alpha f_w + beta f_z + nu f = 0`
/// as functions of `(w, z)`, with `kappa = A(0, 0)`.
#[derive(Clone)]
pub struct CharCoeffs {
    pub alpha: CoeffFn,
    pub beta_c: CoeffFn,
    pub nu: CoeffFn,
    pub kappa: f64,
}

impl CharCoeffs {
    pub fn from_fns(alpha: CoeffFn, beta_c: CoeffFn, nu: CoeffFn, kappa: f64) -> Self {
        Self { alpha, beta_c, nu, kappa }
    }

    pub fn zero() -> Self {
        let z: CoeffFn = Arc::new(|_, _| 0.0);
        Self { alpha: z.clone(), beta_c: z.clone(), nu: z, kappa: 1.0 }
    }

    /// The limit system with a constant first-order coefficient
    /// `A = kappa`, `B = G = 0`.
    pub fn limit(gamma: f64, kappa: f64) -> Self {
        let eval = move |w: f64, z: f64| -> CoeffSet {
            let (rho, u) = limit_inverse(gamma, w, z);
            let g = PointGeom::limit(gamma, rho, u);
            let jet = LimitFlux::new(gamma).jet(rho, u);
            let sp = speed_jet(&jet);
            let [rho_w, u_w, rho_z, u_z] = g.inverse();
            let gap = sp.lambda - sp.mu;
            let lambda_z = sp.lambda_grad[0] * rho_z + sp.lambda_grad[1] * u_z;
            let mu_w = sp.mu_grad[0] * rho_w + sp.mu_grad[1] * u_w;
            CoeffSet { alpha: (lambda_z - kappa * u_z) / gap, beta: -(mu_w - kappa * u_w) / gap, nu: 0.0, eta: 0.0 }
        };
        Self {
            alpha: Arc::new(move |w, z| eval(w, z).alpha),
            beta_c: Arc::new(move |w, z| eval(w, z).beta),
            nu: Arc::new(|_, _| 0.0),
            kappa,
        }
    }
}
