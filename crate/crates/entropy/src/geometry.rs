//! Characteristic curves `sigma(u; r)` through the axis point `(r, 0)`, the
//! Riemann-invariant labelling they induce and the `D1/D2/D3` partition.
//!
//! A curve through `(r, 0)` is a level line of `z`; its mirror image in `u` is a
//! level line of `w`. Curves are labelled by `ell(r) = K sqrt(r)` with
//! `K = w(1, 0)` of the limit system, which reproduces the explicit invariants
//! exactly for the limit flux and is a smooth monotone labelling otherwise.

use std::sync::Arc;

use twocons_pde::{riemann_invariants, Flux};

use crate::error::EntropyError;

/// One point of an integrated curve: `rho(u)`, its slope, and the variation
/// `v = d rho / d label` with its `u`-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub u: f64,
    pub rho: f64,
    pub f: f64,
    pub v: f64,
    pub dv: f64,
}

/// Slope `f = d rho / d u` of the curves tangent to the `lambda` right
/// eigenvector and its derivative in `rho`.
pub fn slope(flux: &dyn Flux, rho: f64, u: f64) -> (f64, f64) {
    let j = flux.jet(rho.max(0.0), u);
    let (pr, pu, fr, fu) = (j.psi.d[1][0], j.psi.d[0][1], j.phi.d[1][0], j.phi.d[0][1]);
    let (pr_r, pu_r, fr_r, fu_r) = (j.psi.d[2][0], j.psi.d[1][1], j.phi.d[2][0], j.phi.d[1][1]);
    let b = fu - pr;
    let b_r = fu_r - pr_r;
    let prod = fr * pu;
    let prod_r = fr_r * pu + fr * pu_r;
    let q = (b * b + 4.0 * prod).max(0.0).sqrt();
    let q_r = if q > 0.0 { (b * b_r + 2.0 * prod_r) / q } else { 0.0 };
    if b > 0.0 {
        let d = q + b;
        (2.0 * pu / d, 2.0 * pu_r / d - 2.0 * pu * (q_r + b_r) / (d * d))
    } else {
        ((q - b) / (2.0 * fr), (q_r - b_r) / (2.0 * fr) - (q - b) * fr_r / (2.0 * fr * fr))
    }
}

/// Whether the curve ODE is well posed at `(rho, u)`.
fn admissible(flux: &dyn Flux, rho: f64, u: f64) -> bool {
    if !(rho.is_finite() && u.is_finite()) || !flux.contains(rho.max(0.0), u) {
        return false;
    }
    let d = flux.jet(rho.max(0.0), u).jacobian();
    let b = d[1][1] - d[0][0];
    d[1][0] > 0.0 && b * b + 4.0 * d[1][0] * d[0][1] >= 0.0
}

fn rk4_step(flux: &dyn Flux, s: &Sample, du: f64) -> Sample {
    let rhs = |rho: f64, v: f64, u: f64| {
        let (f, fr) = slope(flux, rho, u);
        (f, fr * v)
    };
    let (u, r, v) = (s.u, s.rho, s.v);
    let k1 = (s.f, s.dv);
    let k2 = rhs(r + 0.5 * du * k1.0, v + 0.5 * du * k1.1, u + 0.5 * du);
    let k3 = rhs(r + 0.5 * du * k2.0, v + 0.5 * du * k2.1, u + 0.5 * du);
    let k4 = rhs(r + du * k3.0, v + du * k3.1, u + du);
    let rho = r + du / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
    let v = v + du / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    let (f, fr) = slope(flux, rho, u + du);
    Sample { u: u + du, rho, f, v, dv: fr * v }
}

/// How a branch integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchEnd {
    Reached,
    HitZero,
    LeftDomain,
}

/// Integrates from `start` towards `u_target`. The step follows the local
/// scale `sqrt(rho) + |u|` so curves near the origin are resolved.
pub fn integrate_branch(flux: &dyn Flux, start: Sample, u_target: f64, du_max: f64) -> (Vec<Sample>, BranchEnd) {
    let dir = if u_target >= start.u { 1.0 } else { -1.0 };
    let mut out = vec![start];
    let mut cur = start;
    loop {
        let remaining = (u_target - cur.u) * dir;
        if remaining <= 1e-15 * (1.0 + u_target.abs()) {
            return (out, BranchEnd::Reached);
        }
        let scale = cur.rho.max(0.0).sqrt() + cur.u.abs();
        let du = remaining.min(du_max).min((0.02 * scale).max(1e-7));
        let next = rk4_step(flux, &cur, dir * du);
        if next.rho < 0.0 {
            // Locate the crossing of rho = 0 by secant steps on the step length.
            let (mut lo, mut hi) = (0.0, du);
            let (mut flo, mut fhi) = (cur.rho, next.rho);
            let mut hit = next;
            for _ in 0..60 {
                let mid = (lo - flo * (hi - lo) / (fhi - flo)).clamp(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
                let s = rk4_step(flux, &cur, dir * mid);
                hit = s;
                if s.rho.abs() < 1e-15 {
                    break;
                }
                if s.rho > 0.0 {
                    lo = mid;
                    flo = s.rho;
                } else {
                    hi = mid;
                    fhi = s.rho;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            hit.rho = 0.0;
            out.push(hit);
            return (out, BranchEnd::HitZero);
        }
        if !admissible(flux, next.rho, next.u) || !next.v.is_finite() {
            return (out, BranchEnd::LeftDomain);
        }
        out.push(next);
        cur = next;
    }
}

/// A level line `rho = R(u; c)` of `z` with dense cubic Hermite output.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub label: f64,
    pub samples: Vec<Sample>,
    pub hits_zero: bool,
}

impl LevelCurve {
    /// Integrates the curve through `(r, 0)` over `u in [-u_span, u_span]`,
    /// stopping at `rho = 0` or at the edge of the domain.
    pub fn new(flux: &dyn Flux, r: f64, label: f64, dlabel_dr: f64, u_span: f64, du_max: f64) -> Self {
        let (f, fr) = slope(flux, r, 0.0);
        let v = 1.0 / dlabel_dr;
        let start = Sample { u: 0.0, rho: r, f, v, dv: fr * v };
        let (mut neg, end) = integrate_branch(flux, start, -u_span, du_max);
        let (pos, _) = integrate_branch(flux, start, u_span, du_max);
        neg.reverse();
        neg.pop();
        neg.extend(pos);
        Self { label, samples: neg, hits_zero: end == BranchEnd::HitZero }
    }

    pub fn u_min(&self) -> f64 {
        self.samples[0].u
    }

    pub fn u_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].u
    }

    /// `(rho, d rho / d u, v)` at `u`, or `None` outside the integrated range.
    pub fn eval(&self, u: f64) -> Option<(f64, f64, f64)> {
        let s = &self.samples;
        if u < s[0].u || u > s[s.len() - 1].u {
            return None;
        }
        let k = s.partition_point(|p| p.u <= u).clamp(1, s.len() - 1);
        let (a, b) = (&s[k - 1], &s[k]);
        let h = b.u - a.u;
        if h <= 0.0 {
            return Some((a.rho, a.f, a.v));
        }
        let t = (u - a.u) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        let (d00, d10, d01, d11) = (6.0 * t * t - 6.0 * t, 3.0 * t * t - 4.0 * t + 1.0, 6.0 * t - 6.0 * t * t, 3.0 * t * t - 2.0 * t);
        let rho = h00 * a.rho + h10 * h * a.f + h01 * b.rho + h11 * h * b.f;
        let f = (d00 * a.rho + d01 * b.rho) / h + d10 * a.f + d11 * b.f;
        let v = h00 * a.v + h10 * h * a.dv + h01 * b.v + h11 * h * b.dv;
        Some((rho, f, v))
    }
}

/// `sigma(u; r)` sampled at `samples + 1` equally spaced points of `[0, u_max]`
/// (either sign). The integration step adapts to the distance from the origin;
/// sampling stops where the curve reaches `rho = 0` or leaves the domain.
pub fn characteristic_curve(flux: &dyn Flux, r: f64, u_max: f64, samples: usize) -> Result<Vec<(f64, f64)>, EntropyError> {
    if r <= 0.0 {
        return Err(EntropyError::SingularStart(r));
    }
    check_conditions(flux)?;
    let (f, fr) = slope(flux, r, 0.0);
    let start = Sample { u: 0.0, rho: r, f, v: 1.0, dv: fr };
    let du_max = (u_max.abs() / samples.max(1) as f64).min(1e-2 * (1.0 + r.sqrt()));
    let (path, _) = integrate_branch(flux, start, u_max, du_max);
    let curve = LevelCurve { label: 0.0, samples: if u_max >= 0.0 { path } else { path.into_iter().rev().collect() }, hits_zero: false };
    let mut out = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let u = u_max * k as f64 / samples.max(1) as f64;
        match curve.eval(u) {
            Some((rho, _, _)) => out.push((u, rho)),
            None => break,
        }
    }
    Ok(out)
}

/// Nonvanishing of `Phi_u(0, u) - Psi_rho(0, u)` off the axis, which keeps the
/// two families apart on the boundary `rho = 0`.
pub fn check_conditions(flux: &dyn Flux) -> Result<(), EntropyError> {
    for k in 1..=20 {
        let u = 0.005 * k as f64;
        for s in [u, -u] {
            if !flux.contains(0.0, s) {
                continue;
            }
            let d = flux.jet(0.0, s).jacobian();
            let gap = d[1][1] - d[0][0];
            if !(gap * s > 0.0) {
                return Err(EntropyError::Condition(format!("Phi_u - Psi_rho vanishes at (0, {s})")));
            }
        }
    }
    Ok(())
}

/// The three parts of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Region {
    D1,
    D2,
    D3,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::D1 => "D1",
            Region::D2 => "D2",
            Region::D3 => "D3",
        }
    }
}

/// Characteristic geometry with fitted sandwich constants.
#[derive(Clone)]
pub struct CharGeometry {
    flux: Arc<dyn Flux>,
    pub gamma: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Largest radius whose curve reaches `rho = 0` inside the domain (with a
    /// 5% margin in `u`); infinite for unbounded domains. Not canonical.
    pub r0: f64,
    pub c1: f64,
    pub c2: f64,
    label_scale: f64,
}

impl std::fmt::Debug for CharGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CharGeometry")
            .field("flux", &self.flux.name())
            .field("r_lo", &self.r_lo)
            .field("r_hi", &self.r_hi)
            .field("r0", &self.r0)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .finish()
    }
}

impl CharGeometry {
    pub fn new(flux: Arc<dyn Flux>, r_lo: f64, r_hi: f64) -> Result<Self, EntropyError> {
        if !(0.0 < r_lo && r_lo < r_hi) {
            return Err(EntropyError::Invalid(format!("need 0 < r_lo < r_hi, got {r_lo}, {r_hi}")));
        }
        let gamma = flux.gamma();
        if gamma <= 0.75 {
            return Err(EntropyError::Invalid(format!("the construction needs gamma > 3/4, got {gamma}")));
        }
        check_conditions(flux.as_ref())?;
        let label_scale = riemann_invariants(gamma, 1.0, 0.0)?.0;
        let mut geom = Self { flux, gamma, r_lo, r_hi, r0: f64::INFINITY, c1: 0.0, c2: 0.0, label_scale };
        geom.r0 = geom.adaptive_r0();
        if r_hi >= geom.r0 {
            return Err(EntropyError::Invalid(format!("r_hi = {r_hi} exceeds the admissible radius {}", geom.r0)));
        }
        geom.fit_constants()?;
        Ok(geom)
    }

    pub fn flux(&self) -> &Arc<dyn Flux> {
        &self.flux
    }

    /// `ell(r)`, the common value of both invariants at `(r, 0)`.
    pub fn label(&self, r: f64) -> f64 {
        self.label_scale * r.max(0.0).sqrt()
    }

    /// Inverse of [`Self::label`].
    pub fn radius(&self, c: f64) -> f64 {
        (c / self.label_scale).powi(2)
    }

    /// `d ell / d r`.
    pub fn label_slope(&self, r: f64) -> f64 {
        0.5 * self.label_scale / r.sqrt()
    }

    /// Largest `|u|` on the boundary `rho = 0` inside the domain.
    fn boundary_extent(&self) -> f64 {
        let f = self.flux.as_ref();
        if f.contains(0.0, 1e8) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while f.contains(0.0, hi) {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f.contains(0.0, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn adaptive_r0(&self) -> f64 {
        let edge = self.boundary_extent();
        if !edge.is_finite() {
            return f64::INFINITY;
        }
        let limit = 0.95 * edge;
        let reaches = |r: f64| -> bool {
            let (f, fr) = slope(self.flux.as_ref(), r, 0.0);
            let start = Sample { u: 0.0, rho: r, f, v: 1.0, dv: fr };
            let (_, end) = integrate_branch(self.flux.as_ref(), start, -limit, 1e-2);
            end == BranchEnd::HitZero
        };
        let (mut lo, mut hi) = (0.0, self.radius(limit));
        while reaches(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return f64::INFINITY;
            }
        }
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if reaches(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `sigma(u; r)`; zero where the curve has already reached `rho = 0`.
    pub fn sigma(&self, u: f64, r: f64) -> Result<f64, EntropyError> {
        if r <= 0.0 {
            return Err(EntropyError::SingularStart(r));
        }
        let (f, fr) = slope(self.flux.as_ref(), r, 0.0);
        let start = Sample { u: 0.0, rho: r, f, v: 1.0, dv: fr };
        let (path, end) = integrate_branch(self.flux.as_ref(), start, u, 1e-2 * (1.0 + r.sqrt()));
        match end {
            BranchEnd::Reached => Ok(path[path.len() - 1].rho),
            BranchEnd::HitZero => Ok(0.0),
            BranchEnd::LeftDomain => Err(EntropyError::Invalid(format!("sigma(.; {r}) leaves the domain before u = {u}"))),
        }
    }

    /// Invariants `(w, z)` of a point, by following its curves to the axis.
    pub fn invariants(&self, rho: f64, u: f64) -> Result<(f64, f64), EntropyError> {
        let to_axis = |u: f64| -> Result<f64, EntropyError> {
            if rho <= 0.0 && u >= 0.0 {
                return Ok(0.0);
            }
            let (f, fr) = slope(self.flux.as_ref(), rho, u);
            let start = Sample { u, rho, f, v: 1.0, dv: fr };
            let (path, end) = integrate_branch(self.flux.as_ref(), start, 0.0, 1e-2 * (1.0 + rho.sqrt()));
            match end {
                BranchEnd::Reached => Ok(self.label(path[path.len() - 1].rho)),
                _ => Err(EntropyError::Invalid(format!("no axis crossing from ({rho}, {u})"))),
            }
        };
        Ok((to_axis(-u)?, to_axis(u)?))
    }

    /// Partition with respect to a single radius `r`.
    pub fn classify_at(&self, rho: f64, u: f64, r: f64) -> Region {
        let lower = self.sigma(-u.abs(), r).unwrap_or(0.0);
        if rho < lower {
            return Region::D1;
        }
        match self.sigma(u.abs(), r) {
            Ok(upper) if rho > upper => Region::D2,
            _ => Region::D3,
        }
    }

    /// `D1(r_lo)`, `D2(r_hi)`, or the band `D3(r_lo, r_hi)` between them.
    pub fn classify(&self, rho: f64, u: f64) -> Region {
        match self.classify_at(rho, u, self.r_lo) {
            Region::D1 => Region::D1,
            _ => match self.classify_at(rho, u, self.r_hi) {
                Region::D2 => Region::D2,
                _ => Region::D3,
            },
        }
    }

    /// Fits the sandwich constants from curves through radii spread
    /// geometrically over `[r_lo / 10, r_hi]`.
    fn fit_constants(&mut self) -> Result<(), EntropyError> {
        let g = self.gamma;
        let (mut c1, mut c2) = (0.0f64, f64::INFINITY);
        let span = 2.0 * self.label(self.r_hi);
        for k in 0..12 {
            let r = self.r_lo / 10.0 * (10.0 * self.r_hi / self.r_lo).powf(k as f64 / 11.0);
            let curve = LevelCurve::new(self.flux.as_ref(), r, self.label(r), self.label_slope(r), span, 1e-2);
            for s in &curve.samples {
                let (u, rho) = (s.u, s.rho);
                if u < 0.0 && rho > 0.0 && u < -1e-6 * r.sqrt() {
                    let ratio = (rho - r) / (r.sqrt() * u);
                    c1 = c1.max(ratio);
                    c2 = c2.min(ratio);
                } else if u > 1e-6 * r.sqrt() {
                    if rho < r * (1.0 - 1e-12) {
                        return Err(EntropyError::Condition(format!("sigma(u; {r}) decreases at u = {u}")));
                    }
                    let cap = (r.sqrt() * u).min(r.powf((4.0 * g - 3.0) / (4.0 * g - 2.0)) * u.powf(1.0 / (2.0 * g - 1.0)));
                    c1 = c1.max((rho - r) / cap);
                }
            }
        }
        self.c1 = c1;
        self.c2 = c2;
        Ok(())
    }

    /// The sandwich bounds at `(u, sigma)` for radius `r`, with the fitted
    /// constants and a relative slack `tol`.
    pub fn sandwich_holds(&self, r: f64, u: f64, sigma: f64, tol: f64) -> bool {
        let g = self.gamma;
        let slack = tol * (r + r.sqrt() * u.abs());
        if u <= 0.0 {
            r + self.c1 * r.sqrt() * u - slack <= sigma && sigma <= r + self.c2 * r.sqrt() * u + slack
        } else {
            let cap = (r.sqrt() * u).min(r.powf((4.0 * g - 3.0) / (4.0 * g - 2.0)) * u.powf(1.0 / (2.0 * g - 1.0)));
            r - slack <= sigma && sigma <= r + self.c1 * cap + slack
        }
    }
}

/// Classifier with nesting and inclusion checks.
pub struct DomainPartition<'a> {
    geom: &'a CharGeometry,
}

impl<'a> DomainPartition<'a> {
    pub fn new(geom: &'a CharGeometry) -> Self {
        Self { geom }
    }

    pub fn classify(&self, rho: f64, u: f64) -> Region {
        self.geom.classify(rho, u)
    }

    /// `D1(r) in D1(r2)` and `D2(r2) in D2(r)` for `r < r2` on the points.
    pub fn nested(&self, r: f64, r2: f64, points: &[(f64, f64)]) -> bool {
        points.iter().all(|&(rho, u)| {
            let (a, b) = (self.geom.classify_at(rho, u, r), self.geom.classify_at(rho, u, r2));
            (a != Region::D1 || b == Region::D1) && (b != Region::D2 || a == Region::D2)
        })
    }

    /// The cone inclusions around `D1(r)` and `D2(r)` with the fitted constants.
    pub fn inclusions_hold(&self, r: f64, points: &[(f64, f64)]) -> bool {
        let (c1, c2) = (self.geom.c1, self.geom.c2);
        let sr = r.sqrt();
        points.iter().all(|&(rho, u)| {
            let region = self.geom.classify_at(rho, u, r);
            let a = u.abs();
            let slack = 1e-9 * (1.0 + r);
            let inner1 = rho < r - c1 * sr * a - slack;
            let outer1 = rho < r - c2 * sr * a + slack;
            let inner2 = rho > r + c1 * sr * a + slack;
            let outer2 = rho > r - slack;
            (!inner1 || region == Region::D1)
                && (region != Region::D1 || outer1)
                && (!inner2 || region == Region::D2)
                && (region != Region::D2 || outer2)
        })
    }
}

/// Classifies against `D1(r_lo)`, `D2(r_hi)` of the geometry.
pub fn classify(geom: &CharGeometry, rho: f64, u: f64) -> Region {
    geom.classify(rho, u)
}

/// Explicit invariants of the limit system and their gradients:
/// `((w, z), grad w, grad z)`.
pub fn limit_invariants(gamma: f64, rho: f64, u: f64) -> ((f64, f64), [f64; 2], [f64; 2]) {
    let grad = |u: f64| -> (f64, [f64; 2]) {
        let e = 2.0 * gamma - 1.0;
        let delta = (e * e * u * u + 4.0 * rho).sqrt();
        let p1 = e / (4.0 * gamma - 3.0);
        let p2 = (2.0 * gamma - 2.0) / (4.0 * gamma - 3.0);
        let b1 = (delta + e * u) / (2.0 * e);
        let b2 = delta - (2.0 * gamma - 2.0) * u;
        let w = b1.abs().powf(p1) * b2.abs().powf(p2);
        let (d_r, d_u) = (2.0 / delta, e * e * u / delta);
        let lw_r = p1 * (d_r / (2.0 * e)) / b1 + p2 * d_r / b2;
        let lw_u = p1 * ((d_u + e) / (2.0 * e)) / b1 + p2 * (d_u - (2.0 * gamma - 2.0)) / b2;
        (w, [w * lw_r, w * lw_u])
    };
    let (w, gw) = grad(u);
    let (z, gz) = grad(-u);
    ((w, z), gw, [gz[0], -gz[1]])
}

/// Inverse of the explicit limit invariants on `w, z > 0`, using the scaling
/// `w(l^2 rho, l u) = l w(rho, u)`.
pub fn limit_inverse(gamma: f64, w: f64, z: f64) -> (f64, f64) {
    if z <= 0.0 {
        return (0.0, w.max(0.0));
    }
    if w <= 0.0 {
        return (0.0, -z);
    }
    let target = z / w;
    let ratio = |x: f64| {
        let ((a, b), _, _) = limit_invariants(gamma, 1.0, x);
        b / a
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while ratio(lo) < target {
        lo *= 2.0;
    }
    while ratio(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * (1.0 + mid.abs()) {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    let scale = w / limit_invariants(gamma, 1.0, x).0 .0;
    (scale * scale, scale * x)
}
