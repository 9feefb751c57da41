//! The characteristic lattice: labels `v_k = c_lo + (k - m + 1/2) h` placed so
//! that the two cutoff labels fall exactly halfway between lattice lines, and
//! the points where level lines of `w` and `z` with lattice labels intersect.

use std::sync::Arc;

use twocons_pde::{riemann_invariants, Flux};

use crate::coeffs::PointGeom;
use crate::error::EntropyError;
use crate::geometry::{slope, LevelCurve};

/// Smallest label the lattice may reach; the coefficients are singular at 0.
pub const LABEL_FLOOR: f64 = 1e-4;

/// Uniform label lattice with `cells` steps between the cutoff labels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Lattice {
    pub h: f64,
    pub v0: f64,
    /// Index of the first line above the lower cutoff label.
    pub m: usize,
    pub cells: usize,
    /// Largest lattice index.
    pub imax: usize,
    pub c_lo: f64,
    pub c_hi: f64,
}

impl Lattice {
    pub fn new(c_lo: f64, c_hi: f64, cells: usize, extent: f64) -> Result<Self, EntropyError> {
        if !(0.0 < c_lo && c_lo < c_hi) || cells < 4 {
            return Err(EntropyError::Invalid(format!("bad lattice labels {c_lo}, {c_hi} with {cells} cells")));
        }
        let h = (c_hi - c_lo) / cells as f64;
        let m = ((c_lo - LABEL_FLOOR) / h - 0.5).floor();
        if m < 1.0 {
            return Err(EntropyError::Invalid(format!("lower cutoff label {c_lo} is within one cell of the origin")));
        }
        let m = m as usize;
        let v0 = c_lo - (m as f64 - 0.5) * h;
        let imax = ((extent - v0) / h).floor() as usize;
        if imax < m + cells + 2 {
            return Err(EntropyError::Invalid(format!("label extent {extent} does not reach past the upper cutoff")));
        }
        Ok(Self { h, v0, m, cells, imax, c_lo, c_hi })
    }

    /// Label of lattice line `k`.
    pub fn v(&self, k: usize) -> f64 {
        self.v0 + k as f64 * self.h
    }

    /// Label at half-lattice index `q` (`q = 2k` is line `k`).
    pub fn half(&self, q: usize) -> f64 {
        self.v0 + 0.5 * q as f64 * self.h
    }

    /// Last line of the zero region and first line of the closed-form region.
    pub fn d1_last(&self) -> usize {
        self.m - 1
    }

    pub fn d2_first(&self) -> usize {
        self.m + self.cells
    }
}

/// Labelling `ell(r) = K sqrt(r)` of the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLabel {
    pub k: f64,
}

impl AxisLabel {
    pub fn new(gamma: f64) -> Result<Self, EntropyError> {
        Ok(Self { k: riemann_invariants(gamma, 1.0, 0.0)?.0 })
    }

    pub fn label(&self, r: f64) -> f64 {
        self.k * r.max(0.0).sqrt()
    }

    pub fn radius(&self, c: f64) -> f64 {
        (c / self.k).powi(2)
    }

    pub fn slope(&self, r: f64) -> f64 {
        0.5 * self.k / r.sqrt()
    }
}

/// Level lines of `z` for every half-lattice label.
pub struct LevelSet {
    flux: Arc<dyn Flux>,
    pub lattice: Lattice,
    pub axis: AxisLabel,
    curves: Vec<LevelCurve>,
}

impl LevelSet {
    pub fn new(flux: Arc<dyn Flux>, lattice: Lattice, axis: AxisLabel, u_span: f64, du_max: f64) -> Self {
        let curves = (0..=2 * lattice.imax)
            .map(|q| {
                let c = lattice.half(q);
                let r = axis.radius(c);
                LevelCurve::new(flux.as_ref(), r, c, axis.slope(r), u_span, du_max)
            })
            .collect();
        Self { flux, lattice, axis, curves }
    }

    pub fn flux(&self) -> &Arc<dyn Flux> {
        &self.flux
    }

    /// Geometry on the axis at label `c`.
    pub fn axis_point(&self, c: f64) -> PointGeom {
        let r = self.axis.radius(c);
        let lp = self.axis.slope(r);
        let f = slope(self.flux.as_ref(), r, 0.0).0;
        PointGeom { rho: r, u: 0.0, w_rho: lp, w_u: f * lp, z_rho: lp, z_u: -f * lp }
    }

    /// The point with `w = half(p)`, `z = half(q)` for `p >= q` (so `u >= 0`),
    /// or `None` when it lies outside the domain.
    pub fn point(&self, p: usize, q: usize) -> Option<PointGeom> {
        debug_assert!(p >= q);
        if p == q {
            return Some(self.axis_point(self.lattice.half(p)));
        }
        let (zc, wc) = (&self.curves[q], &self.curves[p]);
        let hi = zc.u_max().min(-wc.u_min());
        if !(hi > 0.0) {
            return None;
        }
        let g = |u: f64| -> Option<(f64, f64)> {
            let (rz, fz, _) = zc.eval(u)?;
            let (rw, fw, _) = wc.eval(-u)?;
            Some((rz - rw, fz + fw))
        };
        let (g_hi, _) = g(hi)?;
        if g_hi < 0.0 {
            return None;
        }
        // Safeguarded Newton on the increasing function g.
        let (mut lo, mut up) = (0.0, hi);
        let mut u = 0.5 * hi;
        for _ in 0..100 {
            let (gv, dg) = g(u)?;
            if gv < 0.0 {
                lo = u;
            } else {
                up = u;
            }
            let mut next = if dg > 0.0 { u - gv / dg } else { f64::NAN };
            if !(next > lo && next < up) {
                next = 0.5 * (lo + up);
            }
            if (next - u).abs() <= 1e-15 * (1.0 + u) {
                u = next;
                break;
            }
            u = next;
        }
        let (rho, _, vz) = zc.eval(u)?;
        let (_, _, vw) = wc.eval(-u)?;
        if !(rho > 0.0) || !self.flux.contains(rho, u) {
            return None;
        }
        let fz = slope(self.flux.as_ref(), rho, u).0;
        let fw = slope(self.flux.as_ref(), rho, -u).0;
        Some(PointGeom { rho, u, w_rho: 1.0 / vw, w_u: fw / vw, z_rho: 1.0 / vz, z_u: -fz / vz })
    }
}
