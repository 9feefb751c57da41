//! The cutoff entropy/flux pair on the characteristic lattice.
//!
//! `S` and its first and second partials `S_rho, S_u, S_rr, S_ru` each solve a
//! Cauchy problem with data on the axis `u = 0`. They are marched cell by cell
//! on the `(w, z)` lattice using the integral form of the characteristic
//! equation over each cell (and over the half cell touching the axis). `S_uu`
//! follows from the entropy equation and `F` from integrating
//! `F_w = (Psi_rho S_rho + Phi_rho S_u) rho_w + (Psi_u S_rho + Phi_u S_u) u_w`
//! along lines of constant `z`. Below the lower cutoff `S = 0`; above the upper
//! one `S = rho - (r_hi - r_lo) / log(r_hi / r_lo)` and `F = Psi`.

use std::io::Write;
use std::sync::Arc;

use twocons_pde::{Flux, ScaledFlux};

use crate::coeffs::{char_coefficients, CoeffSet, PointGeom, Unknown};
use crate::cutoff::Cutoff;
use crate::error::EntropyError;
use crate::geometry::{check_conditions, Region};
use crate::lattice::{AxisLabel, Lattice, LevelSet};

/// Relative tolerance between marched and closed-form values above the upper cutoff.
pub const OVERLAP_TOL: f64 = 1e-3;

/// Build parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EntropyConfig {
    pub r_lo: f64,
    pub r_hi: f64,
    /// `(n, beta)` to build for the rescaled flux family.
    pub scaling: Option<(f64, f64)>,
    /// Lattice cells between the two cutoff labels.
    pub cells: usize,
    /// Largest label as a multiple of the upper cutoff label.
    pub extent: f64,
}

impl EntropyConfig {
    pub fn new(r_lo: f64, r_hi: f64) -> Self {
        Self { r_lo, r_hi, scaling: None, cells: 96, extent: 2.0 }
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn with_scaling(mut self, n: f64, beta: f64) -> Self {
        self.scaling = Some((n, beta));
        self
    }
}

/// One grid point of the table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyPoint {
    pub rho: f64,
    pub u: f64,
    pub s: f64,
    pub f: f64,
    pub s_rho: f64,
    pub s_u: f64,
    pub s_rr: f64,
    pub s_ru: f64,
    pub s_uu: f64,
    pub region: Region,
}

impl EntropyPoint {
    /// The cutoff `J = S_rho`.
    pub fn j_cutoff(&self) -> f64 {
        self.s_rho
    }

    /// The complementary cutoff `I = 1 - S_rho`.
    pub fn i_cutoff(&self) -> f64 {
        1.0 - self.s_rho
    }

    /// Mirror image in `u`: `S, S_rho, S_rr, S_uu` are even, the others odd.
    pub fn mirrored(&self) -> Self {
        Self { u: -self.u, f: -self.f, s_u: -self.s_u, s_ru: -self.s_ru, ..*self }
    }
}

/// A lattice node with its invariants and derivative data.
#[derive(Debug, Clone, Copy)]
pub struct LatticeNode {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    pub z: f64,
    pub geom: PointGeom,
    pub point: EntropyPoint,
}

/// Metadata of a build.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TableMeta {
    pub flux: String,
    pub gamma: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub n: Option<f64>,
    pub beta: Option<f64>,
    pub lattice: Lattice,
    /// Largest relative disagreement on the overlap row.
    pub overlap_diff: f64,
}

/// The entropy/flux pair sampled on the lattice nodes with `u >= 0`; the
/// `u < 0` half follows by symmetry.
#[derive(Clone)]
pub struct EntropyTable {
    pub meta: TableMeta,
    flux: Arc<dyn Flux>,
    /// Nodes indexed by [`EntropyTable::index`]; `None` outside the domain.
    nodes: Vec<Option<LatticeNode>>,
}

fn tri(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

impl std::fmt::Debug for EntropyTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EntropyTable").field("meta", &self.meta).finish_non_exhaustive()
    }
}

impl EntropyTable {
    /// The flux the pair belongs to.
    pub fn flux(&self) -> &Arc<dyn Flux> {
        &self.flux
    }

    pub fn index(i: usize, j: usize) -> usize {
        tri(i, j)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.meta.lattice
    }

    /// Node `(i, j)` with `i >= j`.
    pub fn node(&self, i: usize, j: usize) -> Option<&LatticeNode> {
        if j > i || i > self.meta.lattice.imax {
            return None;
        }
        self.nodes[tri(i, j)].as_ref()
    }

    /// Nodes with `u >= 0`.
    pub fn half_nodes(&self) -> impl Iterator<Item = &LatticeNode> {
        self.nodes.iter().flatten()
    }

    /// All points, the `u < 0` half included.
    pub fn points(&self) -> Vec<EntropyPoint> {
        let mut out = Vec::with_capacity(2 * self.nodes.len());
        for n in self.half_nodes() {
            out.push(n.point);
            if n.i != n.j {
                out.push(n.point.mirrored());
            }
        }
        out
    }

    /// Writes `rho,u,S,F,S_rho,S_u,S_rr,S_ru,S_uu,domain_label`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rho,u,S,F,S_rho,S_u,S_rr,S_ru,S_uu,domain_label")?;
        for p in self.points() {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
                p.rho,
                p.u,
                p.s,
                p.f,
                p.s_rho,
                p.s_u,
                p.s_rr,
                p.s_ru,
                p.s_uu,
                p.region.label()
            )?;
        }
        Ok(())
    }

    /// Maps a table built for `r / s^2` with the unscaled flux to the scaled
    /// family, `s = n^beta`: `S^n(rho, u) = s^2 S(rho / s^2, u / s)`,
    /// `F^n = s^3 F(...)`.
    pub fn rescaled(&self, n: f64, beta: f64) -> Self {
        let s = n.powf(beta);
        let mut t = self.clone();
        let scaled = ScaledFlux::new(self.flux.clone(), n, beta);
        t.meta.flux = scaled.name();
        t.flux = Arc::new(scaled);
        t.meta.r_lo *= s * s;
        t.meta.r_hi *= s * s;
        t.meta.n = Some(n);
        t.meta.beta = Some(beta);
        for node in t.nodes.iter_mut().flatten() {
            let p = &mut node.point;
            p.rho *= s * s;
            p.u *= s;
            p.s *= s * s;
            p.f *= s * s * s;
            p.s_u *= s;
            p.s_rr /= s * s;
            p.s_ru /= s;
            let g = &mut node.geom;
            g.rho *= s * s;
            g.u *= s;
            g.w_rho /= s * s;
            g.w_u /= s;
            g.z_rho /= s * s;
            g.z_u /= s;
            node.w *= s;
            node.z *= s;
        }
        t
    }
}

/// Axis data `(s_tilde, t)` of each unknown and the point masses of `t`.
struct AxisData<'a> {
    flux: &'a dyn Flux,
    cutoff: Cutoff,
    axis: AxisLabel,
}

impl AxisData<'_> {
    /// `Psi_u / Phi_rho` on the axis and its `rho`-derivative.
    fn ratio(&self, r: f64) -> (f64, f64) {
        let j = self.flux.jet(r, 0.0);
        let (p01, p11, f10, f20) = (j.psi.d[0][1], j.psi.d[1][1], j.phi.d[1][0], j.phi.d[2][0]);
        (p01 / f10, (p11 * f10 - p01 * f20) / (f10 * f10))
    }

    /// Values at label `c` of all five unknowns.
    fn values(&self, c: f64) -> [f64; 5] {
        let r = self.axis.radius(c);
        let cut = &self.cutoff;
        [cut.s(r), cut.ds(r), 0.0, cut.d2s(r), 0.0]
    }

    /// Densities in the label variable of the normal data `f_w - f_z`.
    fn tau(&self, c: f64) -> [f64; 5] {
        let r = self.axis.radius(c);
        let (q, q_r) = self.ratio(r);
        let f = q.sqrt();
        let lp = self.axis.slope(r);
        let cut = &self.cutoff;
        let scale = 1.0 / (f * lp);
        [0.0, 0.0, q * cut.d2s(r) * scale, 0.0, (q_r * cut.d2s(r) + q * cut.d3s(r)) * scale]
    }

    /// `int_a^b tau` including point masses, splitting at the cutoff labels.
    fn tau_integral(&self, a: f64, b: f64) -> [f64; 5] {
        let knots = [self.axis.label(self.cutoff.r_lo), self.axis.label(self.cutoff.r_hi)];
        let mut cuts = vec![a];
        for k in knots {
            if a < k && k < b {
                cuts.push(k);
            }
        }
        cuts.push(b);
        let mut out = [0.0; 5];
        // Three-point Gauss-Legendre on each smooth piece.
        let nodes = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
        for w in cuts.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in nodes {
                let t = self.tau(mid + half * x);
                for k in 0..5 {
                    out[k] += wt * half * t[k];
                }
            }
        }
        for (r, m) in self.cutoff.d3s_masses() {
            let c = self.axis.label(r);
            if a < c && c < b {
                let q = self.ratio(r).0;
                out[Unknown::SRhoU.index()] += q * m / q.sqrt();
            }
        }
        out
    }
}

type Vals = [f64; 5];

fn nan_vals() -> Vals {
    [f64::NAN; 5]
}

/// Solves the five (four scalar and one 2x2) linear update equations
/// `f_k d_k - e_k f_partner = rhs_k`.
fn solve_update(d: &Vals, e: &Vals, rhs: &Vals) -> Vals {
    let mut out = [0.0; 5];
    for k in 0..3 {
        out[k] = rhs[k] / d[k];
    }
    let (p, q) = (Unknown::SRhoRho.index(), Unknown::SRhoU.index());
    let det = d[p] * d[q] - e[p] * e[q];
    out[p] = (rhs[p] * d[q] + e[p] * rhs[q]) / det;
    out[q] = (d[p] * rhs[q] + e[q] * rhs[p]) / det;
    out
}

fn partner_vals(v: &Vals) -> Vals {
    let (p, q) = (Unknown::SRhoRho.index(), Unknown::SRhoU.index());
    let mut g = [0.0; 5];
    g[p] = v[q];
    g[q] = v[p];
    g
}

/// Builds the entropy/flux pair for `flux` (or its rescaled family).
pub fn build_entropy(flux: Arc<dyn Flux>, cfg: &EntropyConfig) -> Result<EntropyTable, EntropyError> {
    let flux: Arc<dyn Flux> = match cfg.scaling {
        Some((n, beta)) => Arc::new(ScaledFlux::new(flux, n, beta)),
        None => flux,
    };
    if !(0.0 < cfg.r_lo && cfg.r_lo < cfg.r_hi) {
        return Err(EntropyError::Invalid(format!("need 0 < r_lo < r_hi, got {}, {}", cfg.r_lo, cfg.r_hi)));
    }
    let gamma = flux.gamma();
    if gamma <= 0.75 {
        return Err(EntropyError::Invalid(format!("the construction needs gamma > 3/4, got {gamma}")));
    }
    check_conditions(flux.as_ref())?;
    let axis = AxisLabel::new(gamma)?;
    let cutoff = Cutoff::new(cfg.r_lo, cfg.r_hi);
    let (c_lo, c_hi) = (axis.label(cfg.r_lo), axis.label(cfg.r_hi));
    let lat = Lattice::new(c_lo, c_hi, cfg.cells, cfg.extent * c_hi)?;
    let w_max = lat.v(lat.imax);
    let levels = LevelSet::new(flux.clone(), lat, axis, 1.5 * w_max, 0.02 * lat.h.max(1e-3));
    let data = AxisData { flux: flux.as_ref(), cutoff, axis };
    let (m, top, h) = (lat.m, lat.d2_first(), lat.h);
    let size = tri(lat.imax, lat.imax) + 1;

    let geom: Vec<Option<PointGeom>> =
        (0..=lat.imax).flat_map(|i| (0..=i).map(move |j| (i, j))).map(|(i, j)| levels.point(2 * i, 2 * j)).collect();
    let mut vals: Vec<Vals> = vec![nan_vals(); size];
    let closed = |g: &PointGeom| -> Vals { [g.rho - cutoff.offset(), 1.0, 0.0, 0.0, 0.0] };
    for i in 0..=lat.imax {
        for j in 0..=i {
            let k = tri(i, j);
            if i < m {
                vals[k] = [0.0; 5];
            } else if j > top {
                if let Some(g) = &geom[k] {
                    vals[k] = closed(g);
                }
            } else if i == j {
                vals[k] = data.values(lat.v(i));
            }
        }
    }
    let coeff_at = |g: &PointGeom| -> [CoeffSet; 5] { char_coefficients(flux.as_ref(), g) };
    let split = |cs: &[CoeffSet; 5]| {
        let mut out = [[0.0; 5]; 4];
        for (k, c) in cs.iter().enumerate() {
            out[0][k] = c.alpha;
            out[1][k] = c.beta;
            out[2][k] = c.nu;
            out[3][k] = c.eta;
        }
        out
    };

    let mut overlap_diff = 0.0f64;
    for j in (0..=top).rev() {
        let start = if j + 1 >= m { j + 1 } else { m };
        for i in start..=lat.imax {
            let k = tri(i, j);
            if geom[k].is_none() {
                continue;
            }
            let new = if i == j + 1 {
                // Half cell between the axis nodes (j, j), (i, i) and (i, j).
                let (da, db) = (tri(j, j), tri(i, i));
                let gs = [geom[k].unwrap(), geom[da].unwrap(), geom[db].unwrap()];
                let mut cf = [[0.0; 5]; 4];
                for g in &gs {
                    let s = split(&coeff_at(g));
                    for a in 0..4 {
                        for u in 0..5 {
                            cf[a][u] += s[a][u] / 3.0;
                        }
                    }
                }
                let [al, be, nu, eta] = cf;
                let (fa, fb) = (vals[da], vals[db]);
                let (ga, gb) = (partner_vals(&fa), partner_vals(&fb));
                let tau = data.tau_integral(lat.v(j), lat.v(i));
                let (mut d, mut e, mut rhs) = ([0.0; 5], [0.0; 5], [0.0; 5]);
                for u in 0..5 {
                    d[u] = 1.0 - h * al[u] / 2.0 + h * be[u] / 2.0 - h * h * nu[u] / 6.0;
                    e[u] = h * h * eta[u] / 6.0;
                    rhs[u] = 0.5 * (fa[u] + fb[u]) + 0.5 * tau[u] - h * al[u] / 2.0 * fa[u]
                        + h * be[u] / 2.0 * fb[u]
                        + h * h * nu[u] / 6.0 * (fa[u] + fb[u])
                        + h * h * eta[u] / 6.0 * (ga[u] + gb[u]);
                }
                solve_update(&d, &e, &rhs)
            } else {
                let Some(gc) = levels.point(2 * i - 1, 2 * j + 1) else {
                    continue;
                };
                let [al, be, nu, eta] = split(&coeff_at(&gc));
                let (f_n, f_w, f_nw) = (vals[tri(i, j + 1)], vals[tri(i - 1, j)], vals[tri(i - 1, j + 1)]);
                let (g_n, g_w, g_nw) = (partner_vals(&f_n), partner_vals(&f_w), partner_vals(&f_nw));
                let (mut d, mut e, mut rhs) = ([0.0; 5], [0.0; 5], [0.0; 5]);
                for u in 0..5 {
                    let b0 = f_n[u] + f_w[u] - f_nw[u];
                    let wr = f_n[u] - f_w[u] - f_nw[u];
                    let zr = f_n[u] + f_nw[u] - f_w[u];
                    let sr = f_n[u] + f_w[u] + f_nw[u];
                    let sg = g_n[u] + g_w[u] + g_nw[u];
                    d[u] = 1.0 - h * al[u] / 2.0 + h * be[u] / 2.0 - h * h * nu[u] / 4.0;
                    e[u] = h * h * eta[u] / 4.0;
                    rhs[u] = b0 + h * al[u] / 2.0 * wr + h * be[u] / 2.0 * zr + h * h * nu[u] / 4.0 * sr + h * h * eta[u] / 4.0 * sg;
                }
                solve_update(&d, &e, &rhs)
            };
            if j == top {
                // Compare with the closed form, then keep the closed form.
                let c = closed(&geom[k].unwrap());
                let scale = c[0].abs().max(1.0);
                let diff = (new[0] - c[0]).abs() / scale;
                let diff = diff.max((new[1] - 1.0).abs()).max(new[2].abs()).max(new[3].abs() * scale).max(new[4].abs() * scale);
                if diff.is_finite() {
                    overlap_diff = overlap_diff.max(diff);
                }
                vals[k] = c;
            } else {
                vals[k] = new;
            }
        }
    }
    if overlap_diff > OVERLAP_TOL {
        return Err(EntropyError::InconsistentOverlap { diff: overlap_diff, tol: OVERLAP_TOL });
    }

    // Flux: F = 0 below the lower cutoff and on the axis, F = Psi above the
    // upper one, and F_w integrated along each row in between.
    let fw = |g: &PointGeom, v: &Vals| -> f64 {
        let d = flux.jacobian(g.rho, g.u);
        let f_r = d[0][0] * v[1] + d[1][0] * v[2];
        let f_u = d[0][1] * v[1] + d[1][1] * v[2];
        let [rho_w, u_w, _, _] = g.inverse();
        f_r * rho_w + f_u * u_w
    };
    let mut fvals = vec![f64::NAN; size];
    for i in 0..=lat.imax {
        for j in 0..=i {
            let k = tri(i, j);
            let Some(g) = &geom[k] else { continue };
            if i < m || i == j {
                fvals[k] = 0.0;
            } else if j >= top {
                fvals[k] = flux.eval(g.rho, g.u)[0];
            }
        }
    }
    for j in 0..top {
        let first = if j >= m { j + 1 } else { m };
        for i in first..=lat.imax {
            let (k, kp) = (tri(i, j), tri(i - 1, j));
            let (Some(g), Some(gp)) = (&geom[k], &geom[kp]) else { continue };
            fvals[k] = fvals[kp] + 0.5 * h * (fw(gp, &vals[kp]) + fw(g, &vals[k]));
        }
    }

    let mut nodes = vec![None; size];
    for i in 0..=lat.imax {
        for j in 0..=i {
            let k = tri(i, j);
            let Some(g) = geom[k] else { continue };
            let v = vals[k];
            if !v.iter().all(|x| x.is_finite()) || !fvals[k].is_finite() {
                continue;
            }
            let region = if i < m {
                Region::D1
            } else if j >= top {
                Region::D2
            } else {
                Region::D3
            };
            let jet = flux.jet(g.rho, g.u);
            let (a, b, c) = (jet.psi.d[0][1], jet.phi.d[0][1] - jet.psi.d[1][0], -jet.phi.d[1][0]);
            let s_uu = if region == Region::D3 { -(a * v[3] + b * v[4]) / c } else { 0.0 };
            let point = EntropyPoint {
                rho: g.rho,
                u: g.u,
                s: v[0],
                f: fvals[k],
                s_rho: v[1],
                s_u: v[2],
                s_rr: v[3],
                s_ru: v[4],
                s_uu,
                region,
            };
            nodes[k] = Some(LatticeNode { i, j, w: lat.v(i), z: lat.v(j), geom: g, point });
        }
    }
    let meta = TableMeta {
        flux: flux.name(),
        gamma,
        r_lo: cfg.r_lo,
        r_hi: cfg.r_hi,
        n: cfg.scaling.map(|s| s.0),
        beta: cfg.scaling.map(|s| s.1),
        lattice: lat,
        overlap_diff,
    };
    Ok(EntropyTable { meta, flux, nodes })
}

/// Half-width of the label bands around the four cutoff characteristics and
/// along the boundary `rho = 0` that the pointwise checks leave out, as a
/// fraction of the distance between the cutoff labels. `S` is only `C^1` across
/// those lines, and the band is fixed in label space so that refinement
/// compares the same set.
pub const CHECK_BAND: f64 = 0.08;

/// Nodes at least [`CHECK_BAND`] away from the cutoff lines and the boundary,
/// whose difference stencils stay inside the lattice.
fn interior(t: &EntropyTable, i: usize, j: usize) -> bool {
    let lat = t.lattice();
    let band = CHECK_BAND * (lat.c_hi - lat.c_lo);
    let (w, z) = (lat.v(i), lat.v(j));
    let clear = |x: f64| (x - lat.c_lo).abs() >= band && (x - lat.c_hi).abs() >= band;
    i > j && j >= 2 && i + 2 <= lat.imax && w > lat.c_lo && z < lat.c_hi && z >= band && clear(w) && clear(z)
}

/// `(f_rho, f_u)` by fourth-order centred differences in `(w, z)` mapped
/// through the invariant gradients. Points with `j > i` are read from the
/// mirror image.
fn chain_rule(t: &EntropyTable, i: usize, j: usize, odd: bool, field: impl Fn(&EntropyPoint) -> f64) -> Option<(f64, f64)> {
    let h = t.lattice().h;
    let at = |a: isize, b: isize| -> Option<f64> {
        if a < 0 || b < 0 {
            return None;
        }
        let (a, b) = (a as usize, b as usize);
        if a >= b {
            t.node(a, b).map(|n| field(&n.point))
        } else {
            t.node(b, a).map(|n| if odd { -field(&n.point) } else { field(&n.point) })
        }
    };
    let (i, j) = (i as isize, j as isize);
    let d = |f: &dyn Fn(isize) -> Option<f64>| -> Option<f64> {
        Some((f(-2)? - 8.0 * f(-1)? + 8.0 * f(1)? - f(2)?) / (12.0 * h))
    };
    let fw = d(&|k| at(i + k, j))?;
    let fz = d(&|k| at(i, j + k))?;
    let g = &t.node(i as usize, j as usize)?.geom;
    Some((fw * g.w_rho + fz * g.z_rho, fw * g.w_u + fz * g.z_u))
}

/// Residual of the entropy equation on interior `D3` nodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    /// Largest `|a S_rr + b S_ru + c S_uu|` with the second derivatives taken
    /// as differences of `S_rho` and `S_u`.
    pub max_abs: f64,
    /// Largest `|a S_rr| + |b S_ru| + |c S_uu|` over the same nodes.
    pub scale: f64,
    pub relative: f64,
    pub nodes: usize,
}

pub fn residual_check(t: &EntropyTable) -> ResidualReport {
    let flux = t.flux.as_ref();
    let (mut max_abs, mut scale, mut count) = (0.0f64, 0.0f64, 0);
    for n in t.half_nodes() {
        if !interior(t, n.i, n.j) {
            continue;
        }
        let (Some((x_r, x_u)), Some((y_r, y_u))) =
            (chain_rule(t, n.i, n.j, false, |p| p.s_rho), chain_rule(t, n.i, n.j, true, |p| p.s_u))
        else {
            continue;
        };
        let jet = flux.jet(n.point.rho, n.point.u);
        let (a, b, c) = (jet.psi.d[0][1], jet.phi.d[0][1] - jet.psi.d[1][0], -jet.phi.d[1][0]);
        let s_ru = 0.5 * (x_u + y_r);
        max_abs = max_abs.max((a * x_r + b * s_ru + c * y_u).abs());
        scale = scale.max((a * x_r).abs() + (b * s_ru).abs() + (c * y_u).abs());
        count += 1;
    }
    ResidualReport { max_abs, scale, relative: max_abs / scale, nodes: count }
}

/// Compatibility of `F` with `F_rho = Psi_rho S_rho + Phi_rho S_u` and
/// `F_u = Psi_u S_rho + Phi_u S_u`, by differences of the tabulated `F`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CompatibilityReport {
    pub max_abs: f64,
    pub scale: f64,
    pub relative: f64,
    pub nodes: usize,
}

pub fn flux_compatibility(t: &EntropyTable) -> CompatibilityReport {
    let flux = t.flux.as_ref();
    let (mut max_abs, mut scale, mut count) = (0.0f64, 0.0f64, 0);
    for n in t.half_nodes() {
        if !interior(t, n.i, n.j) {
            continue;
        }
        let Some((f_r, f_u)) = chain_rule(t, n.i, n.j, true, |p| p.f) else { continue };
        let d = flux.jacobian(n.point.rho, n.point.u);
        let (x, y) = (n.point.s_rho, n.point.s_u);
        let (e_r, e_u) = (d[0][0] * x + d[1][0] * y, d[0][1] * x + d[1][1] * y);
        max_abs = max_abs.max((f_r - e_r).abs()).max((f_u - e_u).abs());
        scale = scale.max(e_r.abs()).max(e_u.abs());
        count += 1;
    }
    CompatibilityReport { max_abs, scale, relative: max_abs / scale, nodes: count }
}

/// Lower cutoff radius for which the box `{rho, |u| <= big_m}` lies in the
/// zero region of the limit system, with a relative label margin.
pub fn ulr_choice(gamma: f64, big_m: f64, margin: f64) -> Result<f64, EntropyError> {
    let axis = AxisLabel::new(gamma)?;
    let (w, _) = twocons_pde::riemann_invariants(gamma, big_m, big_m)?;
    Ok(axis.radius(w * (1.0 + margin)))
}
