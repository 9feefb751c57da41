//! Explicit Riemann invariants, genuine nonlinearity and the convex entropy of
//! the limit system `Psi = rho u`, `Phi = rho + gamma u^2`.

use crate::eigen::limit_speeds;
use crate::error::PdeError;
use crate::flux::Flux;

/// `(w, z)` normalized by `w(0, u) = u 1{u > 0}` and `z(0, u) = -u 1{u < 0}`.
///
/// The bases are taken in absolute value so the formula is defined for every
/// `gamma`; the normalization holds for `gamma > 3/4`, where both exponents are
/// positive. At `gamma = 1/2` the continuous limit `w = u + 2 sqrt(rho)`,
/// `z = 2 sqrt(rho) - u` is returned.
pub fn riemann_invariants(gamma: f64, rho: f64, u: f64) -> Result<(f64, f64), PdeError> {
    if (gamma - 0.75).abs() < 1e-12 {
        return Err(PdeError::DegenerateGamma);
    }
    if rho < 0.0 {
        return Err(PdeError::Invalid(format!("negative density {rho}")));
    }
    if (gamma - 0.5).abs() < 1e-12 {
        let q = 2.0 * rho.sqrt();
        return Ok((q + u, q - u));
    }
    Ok((w_of(gamma, rho, u), w_of(gamma, rho, -u)))
}

fn w_of(g: f64, rho: f64, u: f64) -> f64 {
    let e = 2.0 * g - 1.0;
    let delta = (e * e * u * u + 4.0 * rho).sqrt();
    let p1 = e / (4.0 * g - 3.0);
    let p2 = (2.0 * g - 2.0) / (4.0 * g - 3.0);
    let b1 = ((delta + e * u) / (2.0 * e)).abs();
    let b2 = (delta - (2.0 * g - 2.0) * u).abs();
    let f1 = if p1 == 0.0 { 1.0 } else { b1.powf(p1) };
    let f2 = if p2 == 0.0 { 1.0 } else { b2.powf(p2) };
    f1 * f2
}

/// Directional derivatives `(grad lambda . r, grad mu . s)` with the
/// unnormalized eigenvectors `r = (rho, lambda - u)`, `s = (rho, mu - u)`.
pub fn genuine_nonlinearity(gamma: f64, rho: f64, u: f64) -> (f64, f64) {
    let e = 2.0 * gamma - 1.0;
    let delta = (e * e * u * u + 4.0 * rho).sqrt();
    let (lam, mu) = limit_speeds(gamma, rho, u);
    let d_rho = 1.0 / delta;
    let d_u = e * e * u / delta;
    let a = 2.0 * gamma + 1.0;
    let gl = d_rho * rho + 0.5 * (a + d_u) * (lam - u);
    let gm = -d_rho * rho + 0.5 * (a - d_u) * (mu - u);
    (gl, gm)
}

/// `S = rho log rho + u^2 / 2`, a convex Lax entropy for every `gamma`.
pub fn convex_entropy(rho: f64, u: f64) -> f64 {
    rho * rho.ln() + 0.5 * u * u
}

/// Residual of `rho S_rr + (2 gamma - 1) u S_ru - S_uu` for [`convex_entropy`].
pub fn convex_entropy_residual(gamma: f64, rho: f64, u: f64) -> f64 {
    let (s_rr, s_ru, s_uu) = (1.0 / rho, 0.0, 1.0);
    rho * s_rr + (2.0 * gamma - 1.0) * u * s_ru - s_uu
}

/// Right-hand side of the characteristic ODE `d rho / d u` whose solutions
/// carry the `lambda` right eigenvector (the family through `(r, 0)`).
pub fn sigma_rhs(flux: &dyn Flux, rho: f64, u: f64) -> f64 {
    let j = flux.jet(rho.max(0.0), u);
    sigma_rhs_from(j.psi.d[1][0], j.psi.d[0][1], j.phi.d[1][0], j.phi.d[0][1])
}

/// The same right-hand side from first partials.
pub fn sigma_rhs_from(psi_r: f64, psi_u: f64, phi_r: f64, phi_u: f64) -> f64 {
    let b = phi_u - psi_r;
    let disc = (b * b + 4.0 * phi_r * psi_u).max(0.0);
    let q = disc.sqrt();
    // Rationalized when cancellation threatens (b > 0, small product).
    if b > 0.0 {
        2.0 * psi_u / (q + b)
    } else {
        (q - b) / (2.0 * phi_r)
    }
}

/// Samples `sigma(u; r)` on `steps + 1` equally spaced `u` in `[0, u_end]` by
/// classical RK4.
pub fn characteristic_curve(flux: &dyn Flux, r: f64, u_end: f64, steps: usize) -> Result<Vec<(f64, f64)>, PdeError> {
    if r <= 0.0 {
        return Err(PdeError::Invalid("characteristic ODE is singular at the origin".into()));
    }
    let h = u_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut u, mut rho) = (0.0, r);
    out.push((u, rho));
    for _ in 0..steps {
        let k1 = sigma_rhs(flux, rho, u);
        let k2 = sigma_rhs(flux, rho + 0.5 * h * k1, u + 0.5 * h);
        let k3 = sigma_rhs(flux, rho + 0.5 * h * k2, u + 0.5 * h);
        let k4 = sigma_rhs(flux, rho + h * k3, u + h);
        rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        u += h;
        if !rho.is_finite() || !flux.contains(rho, u) {
            return Err(PdeError::DomainExit { rho, u, t: f64::NAN });
        }
        out.push((u, rho));
    }
    Ok(out)
}

/// Points `(u, rho)` of the level line `{w = level}` for `u` in `[u_lo, u_hi]`
/// (limit system), found by bisection in `rho` at each `u`.
pub fn level_line(gamma: f64, level: f64, u_lo: f64, u_hi: f64, count: usize) -> Result<Vec<(f64, f64)>, PdeError> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let u = u_lo + (u_hi - u_lo) * k as f64 / (count - 1) as f64;
        let w = |r: f64| riemann_invariants(gamma, r, u).map(|p| p.0);
        if w(0.0)? >= level {
            continue;
        }
        let mut hi = 1.0;
        while w(hi)? < level {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if w(mid)? < level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi {
                break;
            }
        }
        out.push((u, 0.5 * (lo + hi)));
    }
    Ok(out)
}
