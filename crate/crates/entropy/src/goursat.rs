//! Goursat problems `U_wz - (A U)_w - (B U)_z + C U = 0` with data on two
//! characteristic lines through a corner, solved by Picard iteration of the
//! equivalent Volterra equation
//!
//! `U(w, z) = U(w_c, z) + U(w, z_c) - U(w_c, z_c)`
//! `        + int_{z_c}^{z} [A U(w, t) - A U(w_c, t)] dt`
//! `        + int_{w_c}^{w} [B U(s, z) - B U(s, z_c)] ds - iint C U`
//!
//! with signed integrals, on a grid split into blocks small enough that the
//! coefficient integrals stay below 1/6 (which makes every block a
//! contraction with factor at most 1/2).

use crate::coeffs::CharCoeffs;
use crate::error::EntropyError;

/// Certificate threshold for each coefficient integral on a block.
pub const CONTRACTION_BOUND: f64 = 1.0 / 6.0;
/// Picard stopping tolerance on the sup-change.
pub const PICARD_TOL: f64 = 1e-10;
const MAX_PICARD: usize = 400;

/// A Goursat problem on the grid `w_a = w_c + a dw`, `z_b = z_c + b dz`.
pub struct GoursatProblem<'a> {
    pub corner: (f64, f64),
    pub dw: f64,
    pub dz: f64,
    pub na: usize,
    pub nb: usize,
    pub a: &'a (dyn Fn(f64, f64) -> f64 + 'a),
    pub b: &'a (dyn Fn(f64, f64) -> f64 + 'a),
    pub c: &'a (dyn Fn(f64, f64) -> f64 + 'a),
    /// Data on `z = z_c` as a function of `w`.
    pub on_w_line: &'a (dyn Fn(f64) -> f64 + 'a),
    /// Data on `w = w_c` as a function of `z`.
    pub on_z_line: &'a (dyn Fn(f64) -> f64 + 'a),
    /// Restricts the solve to nodes with `a + b <= n` when set.
    pub triangle: Option<usize>,
}

/// Grid solution with bookkeeping.
#[derive(Debug, Clone)]
pub struct GoursatSolution {
    pub na: usize,
    pub nb: usize,
    pub values: Vec<f64>,
    pub block: usize,
    pub iterations: usize,
    /// Largest of the three coefficient integrals over any block.
    pub certificate: f64,
}

impl GoursatSolution {
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * (self.nb + 1) + b]
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl GoursatProblem<'_> {
    fn inside(&self, a: usize, b: usize) -> bool {
        self.triangle.is_none_or(|n| a + b <= n)
    }

    pub fn solve(&self) -> Result<GoursatSolution, EntropyError> {
        let (na, nb) = (self.na, self.nb);
        let idx = |a: usize, b: usize| a * (nb + 1) + b;
        let node = |a: usize, b: usize| (self.corner.0 + a as f64 * self.dw, self.corner.1 + b as f64 * self.dz);
        let size = (na + 1) * (nb + 1);
        let (mut ga, mut gb, mut gc) = (vec![0.0; size], vec![0.0; size], vec![0.0; size]);
        let mut u = vec![f64::NAN; size];
        for a in 0..=na {
            for b in 0..=nb {
                if self.inside(a, b) {
                    let (w, z) = node(a, b);
                    ga[idx(a, b)] = (self.a)(w, z);
                    gb[idx(a, b)] = (self.b)(w, z);
                    gc[idx(a, b)] = (self.c)(w, z);
                }
            }
        }
        for a in 0..=na {
            if self.inside(a, 0) {
                u[idx(a, 0)] = (self.on_w_line)(node(a, 0).0);
            }
        }
        let corner = u[idx(0, 0)];
        for b in 0..=nb {
            if self.inside(0, b) {
                u[idx(0, b)] = (self.on_z_line)(node(0, b).1);
            }
        }
        if (u[idx(0, 0)] - corner).abs() > 1e-12 * (1.0 + corner.abs()) {
            return Err(EntropyError::Invalid(format!("data disagree at the corner: {corner} vs {}", u[idx(0, 0)])));
        }
        let (hw, hz) = (self.dw.abs(), self.dz.abs());
        // Coefficient integrals over a block [a0, a1] x [b0, b1], trapezoid weights.
        let weight = |k: usize, lo: usize, hi: usize| if lo < hi && (k == lo || k == hi) { 0.5 } else { 1.0 };
        let certificate = |a0: usize, a1: usize, b0: usize, b1: usize| -> f64 {
            let (mut ia, mut ib, mut ic) = (0.0f64, 0.0f64, 0.0);
            for a in a0..=a1 {
                let mut s = 0.0;
                for b in b0..=b1 {
                    if self.inside(a, b) {
                        s += weight(b, b0, b1) * ga[idx(a, b)].abs() * hz;
                    }
                }
                ia = ia.max(s);
            }
            for b in b0..=b1 {
                let mut s = 0.0;
                for a in a0..=a1 {
                    if self.inside(a, b) {
                        let wa = weight(a, a0, a1);
                        s += wa * gb[idx(a, b)].abs() * hw;
                        ic += wa * weight(b, b0, b1) * gc[idx(a, b)].abs() * hw * hz;
                    }
                }
                ib = ib.max(s);
            }
            ia.max(ib).max(ic)
        };
        // Largest power-of-two block size whose blocks all pass the certificate.
        let mut block = na.max(nb).max(1).next_power_of_two();
        let worst = loop {
            let mut worst = 0.0f64;
            for a0 in (0..na.max(1)).step_by(block) {
                for b0 in (0..nb.max(1)).step_by(block) {
                    worst = worst.max(certificate(a0, (a0 + block).min(na), b0, (b0 + block).min(nb)));
                }
            }
            if worst < CONTRACTION_BOUND {
                break worst;
            }
            if block == 1 {
                return Err(EntropyError::NoContraction(format!(
                    "a single cell carries a coefficient integral of {worst:.3e}"
                )));
            }
            block /= 2;
        };
        let mut iterations = 0;
        for a0 in (0..na.max(1)).step_by(block) {
            for b0 in (0..nb.max(1)).step_by(block) {
                let (a1, b1) = ((a0 + block).min(na), (b0 + block).min(nb));
                if !self.inside(a0, b0) {
                    continue;
                }
                iterations += self.picard_block(&mut u, &ga, &gb, &gc, (a0, a1), (b0, b1))?;
            }
        }
        Ok(GoursatSolution { na, nb, values: u, block, iterations, certificate: worst })
    }

    #[allow(clippy::too_many_arguments)]
    fn picard_block(
        &self,
        u: &mut [f64],
        ga: &[f64],
        gb: &[f64],
        gc: &[f64],
        (a0, a1): (usize, usize),
        (b0, b1): (usize, usize),
    ) -> Result<usize, EntropyError> {
        let nb = self.nb;
        let idx = |a: usize, b: usize| a * (nb + 1) + b;
        let (dw, dz) = (self.dw, self.dz);
        let corner = u[idx(a0, b0)];
        // Initial guess: the zero-coefficient solution.
        for a in a0 + 1..=a1 {
            for b in b0 + 1..=b1 {
                if self.inside(a, b) {
                    u[idx(a, b)] = u[idx(a0, b)] + u[idx(a, b0)] - corner;
                }
            }
        }
        // Terms fixed by the block's data lines.
        let (wa, wb) = (a1 - a0 + 1, b1 - b0 + 1);
        let loc = |a: usize, b: usize| (a - a0) * wb + (b - b0);
        let mut fixed = vec![0.0; wa * wb];
        {
            // int_{b0}^{b} A U(a0, t) dt, trapezoid.
            let mut acc = 0.0;
            for b in b0..=b1 {
                if b > b0 && self.inside(a0, b) {
                    acc += 0.5 * dz * (ga[idx(a0, b - 1)] * u[idx(a0, b - 1)] + ga[idx(a0, b)] * u[idx(a0, b)]);
                }
                for a in a0..=a1 {
                    fixed[loc(a, b)] -= acc;
                }
            }
            let mut acc = 0.0;
            for a in a0..=a1 {
                if a > a0 && self.inside(a, b0) {
                    acc += 0.5 * dw * (gb[idx(a - 1, b0)] * u[idx(a - 1, b0)] + gb[idx(a, b0)] * u[idx(a, b0)]);
                }
                for b in b0..=b1 {
                    fixed[loc(a, b)] -= acc;
                }
            }
        }
        let mut cum = vec![0.0; wa * wb];
        let mut next = vec![0.0; wa * wb];
        for it in 1..=MAX_PICARD {
            // Running trapezoid sums of the three integrals for the current iterate.
            let mut change = 0.0f64;
            let mut scale = 1.0f64;
            for a in a0..=a1 {
                let mut ia = 0.0;
                for b in b0..=b1 {
                    if !self.inside(a, b) {
                        continue;
                    }
                    if b > b0 {
                        ia += 0.5 * dz * (ga[idx(a, b - 1)] * u[idx(a, b - 1)] + ga[idx(a, b)] * u[idx(a, b)]);
                    }
                    cum[loc(a, b)] = ia;
                }
            }
            for b in b0..=b1 {
                let mut ib = 0.0;
                for a in a0..=a1 {
                    if !self.inside(a, b) {
                        continue;
                    }
                    if a > a0 {
                        ib += 0.5 * dw * (gb[idx(a - 1, b)] * u[idx(a - 1, b)] + gb[idx(a, b)] * u[idx(a, b)]);
                    }
                    next[loc(a, b)] = cum[loc(a, b)] + ib;
                }
            }
            // Double integral of C U by the product trapezoid rule.
            let mut dbl = vec![0.0; wa * wb];
            for a in a0..=a1 {
                let mut col = 0.0;
                for b in b0..=b1 {
                    if !self.inside(a, b) {
                        continue;
                    }
                    if b > b0 {
                        col += 0.5 * dz * (gc[idx(a, b - 1)] * u[idx(a, b - 1)] + gc[idx(a, b)] * u[idx(a, b)]);
                    }
                    dbl[loc(a, b)] = col;
                }
            }
            for b in b0..=b1 {
                let mut acc = 0.0;
                for a in a0..=a1 {
                    if !self.inside(a, b) {
                        continue;
                    }
                    if a > a0 {
                        acc += 0.5 * dw * (dbl[loc(a - 1, b)] + dbl[loc(a, b)]);
                    }
                    next[loc(a, b)] -= acc;
                }
            }
            for a in a0 + 1..=a1 {
                for b in b0 + 1..=b1 {
                    if !self.inside(a, b) {
                        continue;
                    }
                    let v = u[idx(a0, b)] + u[idx(a, b0)] - corner + fixed[loc(a, b)] + next[loc(a, b)];
                    change = change.max((v - u[idx(a, b)]).abs());
                    scale = scale.max(v.abs());
                    u[idx(a, b)] = v;
                }
            }
            if !change.is_finite() {
                return Err(EntropyError::NoContraction("non-finite Picard iterate".into()));
            }
            if change < PICARD_TOL * scale {
                return Ok(it);
            }
        }
        Err(EntropyError::NoContraction(format!("Picard iteration did not settle in {MAX_PICARD} sweeps")))
    }
}

/// The Riemann function `phi(w0, z0; s, t)` on the triangle
/// `z0 <= t <= s <= w0`, sampled at `s = w0 - a h`, `t = z0 + b h`,
/// `a + b <= n`, `h = (w0 - z0) / n`.
#[derive(Debug, Clone)]
pub struct RiemannGrid {
    pub w0: f64,
    pub z0: f64,
    pub n: usize,
    pub h: f64,
    pub solution: GoursatSolution,
}

impl RiemannGrid {
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.solution.at(a, b)
    }

    /// `phi` at the diagonal node `v = w0 - a h`.
    pub fn diagonal(&self, a: usize) -> f64 {
        self.at(a, self.n - a)
    }

    /// `(phi_w - phi_z)` along the diagonal by one-sided second-order
    /// differences into the triangle; the two nodes next to each end are
    /// extrapolated quadratically.
    pub fn diagonal_normal_derivative(&self) -> Vec<f64> {
        let n = self.n;
        let h = self.h;
        let mut out = vec![f64::NAN; n + 1];
        if n < 6 {
            for (a, o) in out.iter_mut().enumerate() {
                let b = n - a;
                // First-order fallback on coarse grids.
                let dw = if a >= 1 { (self.at(a - 1, b) - self.at(a, b)) / h } else { (self.at(a, b - 1) - self.at(a + 1, b - 1)) / h };
                let dz = if b >= 1 { (self.at(a, b) - self.at(a, b - 1)) / h } else { (self.at(a - 1, b + 1) - self.at(a - 1, b)) / h };
                *o = dw - dz;
            }
            return out;
        }
        for (a, o) in out.iter_mut().enumerate().take(n - 1).skip(2) {
            let b = n - a;
            // w increases as a decreases; z increases with b.
            let dw = (3.0 * self.at(a, b) - 4.0 * self.at(a - 1, b) + self.at(a - 2, b)) / (-2.0 * h);
            let dz = (3.0 * self.at(a, b) - 4.0 * self.at(a, b - 1) + self.at(a, b - 2)) / (2.0 * h);
            *o = dw - dz;
        }
        let ext = |p: f64, q: f64, r: f64| 3.0 * p - 3.0 * q + r;
        out[1] = ext(out[2], out[3], out[4]);
        out[0] = ext(out[1], out[2], out[3]);
        out[n - 1] = ext(out[n - 2], out[n - 3], out[n - 4]);
        out[n] = ext(out[n - 1], out[n - 2], out[n - 3]);
        out
    }
}

/// Solves the adjoint problem `phi_wz - (alpha phi)_w - (beta phi)_z + nu phi = 0`
/// with `phi(w0, t) = exp int_{z0}^{t} alpha(w0, v) dv` and
/// `phi(s, z0) = exp int_{w0}^{s} beta(v, z0) dv`.
pub fn riemann_function(coeffs: &CharCoeffs, w0: f64, z0: f64, n: usize) -> Result<RiemannGrid, EntropyError> {
    if !(z0 < w0) || n < 2 {
        return Err(EntropyError::Invalid(format!("need z0 < w0 and n >= 2, got {z0}, {w0}, {n}")));
    }
    let h = (w0 - z0) / n as f64;
    // Boundary exponentials by cumulative trapezoid on the same grid.
    let cumulative = |f: &dyn Fn(usize) -> f64, step: f64| -> Vec<f64> {
        let mut out = vec![1.0; n + 1];
        let mut acc = 0.0;
        for k in 1..=n {
            acc += 0.5 * step * (f(k - 1) + f(k));
            out[k] = acc.exp();
        }
        out
    };
    let on_z = cumulative(&|b| (coeffs.alpha)(w0, z0 + b as f64 * h), h);
    let on_w = cumulative(&|a| (coeffs.beta_c)(w0 - a as f64 * h, z0), -h);
    let from_w = |w: f64| on_w[((w0 - w) / h).round() as usize];
    let from_z = |z: f64| on_z[((z - z0) / h).round() as usize];
    let (a, b, c) = (&*coeffs.alpha, &*coeffs.beta_c, &*coeffs.nu);
    let problem = GoursatProblem {
        corner: (w0, z0),
        dw: -h,
        dz: h,
        na: n,
        nb: n,
        a,
        b,
        c,
        on_w_line: &from_w,
        on_z_line: &from_z,
        triangle: Some(n),
    };
    let solution = problem.solve()?;
    Ok(RiemannGrid { w0, z0, n, h, solution })
}

/// Diagonal data of a Cauchy problem: `f(v, v) = s(v)` and
/// `(f_w - f_z)(v, v) = t(v)`.
pub struct CauchyData<'a> {
    pub s: &'a dyn Fn(f64) -> f64,
    pub t: &'a dyn Fn(f64) -> f64,
}

/// `f(w0, z0)` for `f_wz + alpha f_w + beta f_z + nu f = rhs` from the
/// Riemann-function representation
///
/// `f = phi s / 2 |_(z0) + phi s / 2 |_(w0) + 1/2 int phi t - 1/2 int (phi_w - phi_z) s`
/// `  + int (beta - alpha) phi s - iint rhs phi`,
///
/// all single integrals along the diagonal from `z0` to `w0`.
pub fn solve_cauchy(
    coeffs: &CharCoeffs,
    data: &CauchyData<'_>,
    w0: f64,
    z0: f64,
    n: usize,
    rhs: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<f64, EntropyError> {
    if w0 == z0 {
        return Ok((data.s)(w0));
    }
    let grid = riemann_function(coeffs, w0, z0, n)?;
    let h = grid.h;
    let normal = grid.diagonal_normal_derivative();
    let v = |a: usize| w0 - a as f64 * h;
    let mut f = 0.5 * grid.diagonal(n) * (data.s)(z0) + 0.5 * grid.diagonal(0) * (data.s)(w0);
    let integrand = |a: usize| {
        let (vv, phi) = (v(a), grid.diagonal(a));
        let s = (data.s)(vv);
        0.5 * phi * (data.t)(vv) - 0.5 * normal[a] * s + ((coeffs.beta_c)(vv, vv) - (coeffs.alpha)(vv, vv)) * phi * s
    };
    for a in 0..=n {
        let wgt = if a == 0 || a == n { 0.5 } else { 1.0 };
        f += wgt * h * integrand(a);
    }
    if let Some(g) = rhs {
        // Product trapezoid over the triangle; diagonal nodes carry half weight.
        let mut acc = 0.0;
        for a in 0..=n {
            for b in 0..=(n - a) {
                let (s, t) = (w0 - a as f64 * h, z0 + b as f64 * h);
                let mut wgt = 1.0;
                if a == 0 || b == 0 {
                    wgt *= 0.5;
                }
                if a + b == n {
                    wgt *= 0.5;
                }
                acc += wgt * g(s, t) * grid.at(a, b);
            }
        }
        f -= acc * h * h;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn zero_coefficients_give_one() {
        let g = riemann_function(&CharCoeffs::zero(), 2.0, 0.5, 32).unwrap();
        for a in 0..=32 {
            for b in 0..=(32 - a) {
                assert_eq!(g.at(a, b), 1.0);
            }
        }
    }

    #[test]
    fn constant_alpha_has_closed_form() {
        // phi = exp(alpha (t - z0)) solves the adjoint problem when beta = nu = 0.
        let al = 0.7;
        let c = CharCoeffs::from_fns(Arc::new(move |_, _| al), Arc::new(|_, _| 0.0), Arc::new(|_, _| 0.0), 1.0);
        let g = riemann_function(&c, 1.5, 0.5, 40).unwrap();
        let h = g.h;
        for a in 0..=40 {
            for b in 0..=(40 - a) {
                let t = 0.5 + b as f64 * h;
                assert!((g.at(a, b) - (al * (t - 0.5)).exp()).abs() < 1e-4);
            }
        }
    }
}
