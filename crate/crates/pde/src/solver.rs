//! Method-of-lines solvers for `rho_t + Psi(rho, u)_x = 0`, `u_t + Phi(rho, u)_x = 0`
//! on the periodic unit interval.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use twocons_model::{Field, FieldKind};

use crate::eigen::speeds;
use crate::error::PdeError;
use crate::flux::Flux;

/// Spatial discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Finite volume MUSCL-Hancock, local Lax-Friedrichs flux, minmod slopes.
    MusclHancock,
    /// Fourth-order central differences, RK4, exponential spectral filter.
    Central4,
}

impl Scheme {
    pub fn design_order(self) -> f64 {
        match self {
            Scheme::MusclHancock => 2.0,
            Scheme::Central4 => 4.0,
        }
    }

    /// Grid offset of the unknowns (cell centres or nodes).
    pub fn offset(self) -> f64 {
        match self {
            Scheme::MusclHancock => 0.5,
            Scheme::Central4 => 0.0,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "muscl" | "muscl-hancock" => Ok(Scheme::MusclHancock),
            "central4" => Ok(Scheme::Central4),
            _ => Err(format!("unknown scheme '{s}' (muscl, central4)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub m: usize,
    pub cfl: f64,
    /// Blow-up is declared once `max |u_x|` exceeds this multiple of its
    /// initial value.
    pub blowup_factor: f64,
    /// Extra snapshot times in `(0, t_end)`; `0` and `t_end` are always kept.
    pub snapshot_times: Vec<f64>,
    /// Exponential filter `exp(-strength (k / k_max)^order)` for `Central4`.
    pub filter_strength: f64,
    pub filter_order: i32,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, m: usize) -> Self {
        Self {
            scheme,
            m,
            cfl: 0.4,
            blowup_factor: 50.0,
            snapshot_times: Vec::new(),
            filter_strength: 36.0,
            filter_order: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub rho: Field,
    pub u: Field,
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        self.rho.time
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub scheme: Scheme,
    pub m: usize,
    pub t_end: f64,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Largest CFL number of any accepted step.
    pub max_cfl: f64,
    pub design_order: f64,
    /// Spectral filter strength (zero for the finite volume scheme).
    pub hyperviscosity: f64,
    pub snapshots: Vec<Snapshot>,
    pub blowup_time: Option<f64>,
}

impl SolverRun {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a run always holds the initial snapshot")
    }

    /// Writes `t,x,rho,u` for every snapshot.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,rho,u")?;
        for s in &self.snapshots {
            for k in 0..s.rho.m() {
                writeln!(out, "{},{},{},{}", s.time(), s.rho.x(k), s.rho.values[k], s.u.values[k])?;
            }
        }
        Ok(())
    }
}

/// Initial profiles on the torus.
pub struct InitialData<'a> {
    pub rho: &'a (dyn Fn(f64) -> f64 + Sync),
    pub u: &'a (dyn Fn(f64) -> f64 + Sync),
}

/// Discretizes initial data: cell averages (3-point Gauss) or point values.
pub fn discretize(init: &InitialData, scheme: Scheme, m: usize) -> (Vec<f64>, Vec<f64>) {
    match scheme {
        Scheme::MusclHancock => {
            let g = (0.6_f64).sqrt() / 2.0;
            let nodes = [(0.5 - g, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + g, 5.0 / 18.0)];
            let avg = |f: &dyn Fn(f64) -> f64, k: usize| -> f64 {
                nodes.iter().map(|(s, w)| w * f((k as f64 + s) / m as f64)).sum()
            };
            ((0..m).map(|k| avg(init.rho, k)).collect(), (0..m).map(|k| avg(init.u, k)).collect())
        }
        Scheme::Central4 => {
            let x = |k: usize| k as f64 / m as f64;
            ((0..m).map(|k| (init.rho)(x(k))).collect(), (0..m).map(|k| (init.u)(x(k))).collect())
        }
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

fn spectral_radius(flux: &dyn Flux, rho: f64, u: f64) -> f64 {
    match speeds(flux.jacobian(rho, u)) {
        Some((l, m)) => l.abs().max(m.abs()),
        // Marginal loss of hyperbolicity from rounding: bound by the matrix norm.
        None => {
            let d = flux.jacobian(rho, u);
            d.iter().flatten().map(|x| x.abs()).sum()
        }
    }
}

fn max_grad(u: &[f64], dx: f64) -> f64 {
    let m = u.len();
    (0..m).map(|i| (u[(i + 1) % m] - u[(i + m - 1) % m]).abs() / (2.0 * dx)).fold(0.0, f64::max)
}

struct Filter {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    damp: Vec<f64>,
}

impl Filter {
    fn new(m: usize, strength: f64, order: i32) -> Self {
        let mut planner = FftPlanner::new();
        let kmax = (m / 2) as f64;
        let damp = (0..m)
            .map(|k| {
                let kk = if k <= m / 2 { k } else { m - k } as f64;
                (-strength * (kk / kmax).powi(order)).exp()
            })
            .collect();
        Self { fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m), damp }
    }

    fn apply(&self, v: &mut [f64]) {
        let m = v.len();
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        for (b, d) in buf.iter_mut().zip(&self.damp) {
            *b *= d / m as f64;
        }
        self.inv.process(&mut buf);
        for (x, b) in v.iter_mut().zip(&buf) {
            *x = b.re;
        }
    }
}

fn check_domain(flux: &dyn Flux, rho: &mut [f64], u: &[f64], t: f64) -> Result<(), PdeError> {
    for i in 0..rho.len() {
        if !rho[i].is_finite() || !u[i].is_finite() {
            return Err(PdeError::DomainExit { rho: rho[i], u: u[i], t });
        }
        if !flux.contains(rho[i], u[i]) {
            if rho[i] < 0.0 && rho[i] > -1e-12 && flux.contains(0.0, u[i]) {
                rho[i] = 0.0;
            } else {
                return Err(PdeError::DomainExit { rho: rho[i], u: u[i], t });
            }
        }
    }
    Ok(())
}

fn muscl_step(flux: &dyn Flux, rho: &mut [f64], u: &mut [f64], dt: f64, dx: f64) {
    let m = rho.len();
    let l = |i: usize| (i + m - 1) % m;
    let r = |i: usize| (i + 1) % m;
    let mut left = vec![[0.0; 2]; m];
    let mut right = vec![[0.0; 2]; m];
    let k = 0.5 * dt / dx;
    for i in 0..m {
        let sr = minmod(rho[i] - rho[l(i)], rho[r(i)] - rho[i]);
        let su = minmod(u[i] - u[l(i)], u[r(i)] - u[i]);
        let a = [rho[i] - 0.5 * sr, u[i] - 0.5 * su];
        let b = [rho[i] + 0.5 * sr, u[i] + 0.5 * su];
        let fa = flux.eval(a[0], a[1]);
        let fb = flux.eval(b[0], b[1]);
        for c in 0..2 {
            left[i][c] = a[c] + k * (fa[c] - fb[c]);
            right[i][c] = b[c] + k * (fa[c] - fb[c]);
        }
    }
    // Interface i + 1/2 between right[i] and left[i + 1].
    let mut fhat = vec![[0.0; 2]; m];
    for i in 0..m {
        let a = right[i];
        let b = left[r(i)];
        let fa = flux.eval(a[0], a[1]);
        let fb = flux.eval(b[0], b[1]);
        let s = spectral_radius(flux, a[0], a[1]).max(spectral_radius(flux, b[0], b[1]));
        for c in 0..2 {
            fhat[i][c] = 0.5 * (fa[c] + fb[c]) - 0.5 * s * (b[c] - a[c]);
        }
    }
    let q = dt / dx;
    for i in 0..m {
        rho[i] -= q * (fhat[i][0] - fhat[l(i)][0]);
        u[i] -= q * (fhat[i][1] - fhat[l(i)][1]);
    }
}

fn central_rhs(flux: &dyn Flux, rho: &[f64], u: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let m = rho.len();
    let f: Vec<[f64; 2]> = (0..m).map(|i| flux.eval(rho[i], u[i])).collect();
    let at = |i: isize, c: usize| f[i.rem_euclid(m as isize) as usize][c];
    // Interface flux (-F_{i+2} + 7F_{i+1} + 7F_i - F_{i-1}) / 12 keeps the
    // scheme in conservation form.
    let mut h = vec![[0.0; 2]; m];
    for (i, hi) in h.iter_mut().enumerate() {
        let i = i as isize;
        for (c, v) in hi.iter_mut().enumerate() {
            *v = (-at(i + 2, c) + 7.0 * at(i + 1, c) + 7.0 * at(i, c) - at(i - 1, c)) / 12.0;
        }
    }
    let mut dr = vec![0.0; m];
    let mut du = vec![0.0; m];
    for i in 0..m {
        let p = (i + m - 1) % m;
        dr[i] = -(h[i][0] - h[p][0]) / dx;
        du[i] = -(h[i][1] - h[p][1]) / dx;
    }
    (dr, du)
}

fn rk4_step(flux: &dyn Flux, rho: &mut [f64], u: &mut [f64], dt: f64, dx: f64) {
    let m = rho.len();
    let stage = |base_r: &[f64], base_u: &[f64], kr: &[f64], ku: &[f64], a: f64| -> (Vec<f64>, Vec<f64>) {
        let r: Vec<f64> = (0..m).map(|i| base_r[i] + a * kr[i]).collect();
        let v: Vec<f64> = (0..m).map(|i| base_u[i] + a * ku[i]).collect();
        central_rhs(flux, &r, &v, dx)
    };
    let (k1r, k1u) = central_rhs(flux, rho, u, dx);
    let (k2r, k2u) = stage(rho, u, &k1r, &k1u, 0.5 * dt);
    let (k3r, k3u) = stage(rho, u, &k2r, &k2u, 0.5 * dt);
    let (k4r, k4u) = stage(rho, u, &k3r, &k3u, dt);
    for i in 0..m {
        rho[i] += dt / 6.0 * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i]);
        u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
    }
}

/// Integrates from `t = 0` to `t_end`.
///
/// On gradient blow-up the run up to that time is returned inside
/// [`PdeError::BlowupBeforeT`].
pub fn solve(flux: &dyn Flux, init: &InitialData, t_end: f64, cfg: &SolverConfig) -> Result<SolverRun, PdeError> {
    if cfg.m < 8 || t_end < 0.0 || cfg.cfl <= 0.0 || cfg.cfl > 0.5 {
        return Err(PdeError::Invalid(format!("m = {}, t_end = {t_end}, cfl = {}", cfg.m, cfg.cfl)));
    }
    let m = cfg.m;
    let dx = 1.0 / m as f64;
    let (mut rho, mut u) = discretize(init, cfg.scheme, m);
    check_domain(flux, &mut rho, &u, 0.0)?;
    let offset = cfg.scheme.offset();
    let snap = |rho: &[f64], u: &[f64], t: f64| Snapshot {
        rho: Field::new(rho.to_vec(), t, FieldKind::Rho, offset),
        u: Field::new(u.to_vec(), t, FieldKind::U, offset),
    };
    let mut run = SolverRun {
        scheme: cfg.scheme,
        m,
        t_end,
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
        max_cfl: 0.0,
        design_order: cfg.scheme.design_order(),
        hyperviscosity: if cfg.scheme == Scheme::Central4 { cfg.filter_strength } else { 0.0 },
        snapshots: vec![snap(&rho, &u, 0.0)],
        blowup_time: None,
    };
    let mut stops: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|&s| s > 0.0 && s < t_end).collect();
    stops.push(t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let filter = (cfg.scheme == Scheme::Central4).then(|| Filter::new(m, cfg.filter_strength, cfg.filter_order));
    let g0 = max_grad(&u, dx).max(max_grad(&rho, dx)).max(1e-300);
    let mut t = 0.0;
    for &stop in &stops {
        while t < stop - 1e-14 * stop.max(1.0) {
            let smax = (0..m).map(|i| spectral_radius(flux, rho[i], u[i])).fold(0.0, f64::max);
            let mut dt = if smax > 0.0 { cfg.cfl * dx / smax } else { stop - t };
            if t + dt > stop {
                dt = stop - t;
            }
            match cfg.scheme {
                Scheme::MusclHancock => muscl_step(flux, &mut rho, &mut u, dt, dx),
                Scheme::Central4 => {
                    rk4_step(flux, &mut rho, &mut u, dt, dx);
                    if let Some(f) = &filter {
                        f.apply(&mut rho);
                        f.apply(&mut u);
                    }
                }
            }
            t = if (stop - (t + dt)).abs() < 1e-14 * stop.max(1.0) { stop } else { t + dt };
            run.steps += 1;
            run.dt_min = run.dt_min.min(dt);
            run.dt_max = run.dt_max.max(dt);
            run.max_cfl = run.max_cfl.max(dt * smax / dx);
            check_domain(flux, &mut rho, &u, t)?;
            let g = max_grad(&u, dx).max(max_grad(&rho, dx));
            if g > cfg.blowup_factor * g0 {
                run.blowup_time = Some(t);
                run.snapshots.push(snap(&rho, &u, t));
                return Err(PdeError::BlowupBeforeT { time: t, run: Box::new(run) });
            }
        }
        run.snapshots.push(snap(&rho, &u, stop));
    }
    Ok(run)
}

/// Restricts a field on `2m` points to `m` points (pair averages for cell
/// averages, injection for nodal values).
pub fn restrict(fine: &Field, scheme: Scheme) -> Field {
    let m = fine.m() / 2;
    let values = match scheme {
        Scheme::MusclHancock => (0..m).map(|k| 0.5 * (fine.values[2 * k] + fine.values[2 * k + 1])).collect(),
        Scheme::Central4 => (0..m).map(|k| fine.values[2 * k]).collect(),
    };
    Field::new(values, fine.time, fine.kind, fine.offset)
}

fn l1(a: &Field, b: &Field) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.m() as f64
}

/// Observed orders from successive doublings `ms[k+1] = 2 ms[k]`:
/// returns `(errors, orders)` where `errors[k] = |U_{m_k} - R U_{m_{k+1}}|_1`
/// summed over both components.
pub fn refinement_study(
    flux: &dyn Flux,
    init: &InitialData,
    t: f64,
    scheme: Scheme,
    ms: &[usize],
) -> Result<(Vec<f64>, Vec<f64>), PdeError> {
    let runs: Vec<SolverRun> =
        ms.iter().map(|&m| solve(flux, init, t, &SolverConfig::new(scheme, m))).collect::<Result<_, _>>()?;
    let mut errors = Vec::new();
    for k in 0..runs.len() - 1 {
        let (a, b) = (runs[k].last(), runs[k + 1].last());
        errors.push(l1(&a.rho, &restrict(&b.rho, scheme)) + l1(&a.u, &restrict(&b.u, scheme)));
    }
    let orders = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    Ok((errors, orders))
}

/// Richardson-extrapolated reference solution on an `m`-point grid from runs
/// at `m` and `2m`.
pub fn smooth_solution_oracle(
    flux: &dyn Flux,
    init: &InitialData,
    t: f64,
    m: usize,
    scheme: Scheme,
) -> Result<(Field, Field), PdeError> {
    if t == 0.0 {
        let (r, u) = discretize(init, scheme, m);
        let o = scheme.offset();
        return Ok((Field::new(r, 0.0, FieldKind::Rho, o), Field::new(u, 0.0, FieldKind::U, o)));
    }
    let coarse = solve(flux, init, t, &SolverConfig::new(scheme, m))?;
    let fine = solve(flux, init, t, &SolverConfig::new(scheme, 2 * m))?;
    let p = 2f64.powf(scheme.design_order());
    let ex = |c: &Field, f: &Field| {
        let rf = restrict(f, scheme);
        let v = rf.values.iter().zip(&c.values).map(|(a, b)| a + (a - b) / (p - 1.0)).collect();
        Field::new(v, t, c.kind, c.offset)
    };
    Ok((ex(&coarse.last().rho, &fine.last().rho), ex(&coarse.last().u, &fine.last().u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::LimitFlux;

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(minmod(1.0, -1.0), 0.0);
    }

    #[test]
    fn filter_keeps_the_mean_and_low_modes() {
        let m = 64;
        let f = Filter::new(m, 36.0, 16);
        let mut v: Vec<f64> = (0..m).map(|k| 1.0 + (2.0 * std::f64::consts::PI * k as f64 / m as f64).sin()).collect();
        let orig = v.clone();
        f.apply(&mut v);
        let diff = v.iter().zip(&orig).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-13);
    }

    #[test]
    fn rejects_bad_config() {
        let init = InitialData { rho: &|_| 1.0, u: &|_| 0.0 };
        let mut cfg = SolverConfig::new(Scheme::MusclHancock, 32);
        cfg.cfl = 0.9;
        assert!(solve(&LimitFlux::new(2.0), &init, 0.1, &cfg).is_err());
    }
}
