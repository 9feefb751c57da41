//! Replica-averaged particle fields against smooth PDE solutions.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use twocons_model::{build_model, macroscopic_flux, validate_conditions, Field, FieldKind, FluxPair, ModelSpec, SpinModel};
use twocons_pde::{smooth_solution_oracle, solve, Flux, InitialData, LimitFlux, PdeError, SolverConfig, TwoLaneFlux};
use twocons_sim::{empirical_fields, observables, sample_local_equilibrium, simulate, ScalingMode, ScalingPlan};

use crate::config::{ExperimentConfig, TestFn};
use crate::error::HarnessError;

/// Distances between replica-mean block fields and the oracle at one `(n, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub n: usize,
    pub l: usize,
    pub t: f64,
    pub l1_rho: f64,
    pub l1_u: f64,
    pub linf_rho: f64,
    pub linf_u: f64,
}

impl DistanceRow {
    /// `L1` distance of the pair `(rho, u)`.
    pub fn l1(&self) -> f64 {
        self.l1_rho + self.l1_u
    }
}

/// Replica statistics of one weak pairing against its PDE integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakRow {
    pub n: usize,
    pub t: f64,
    pub field: FieldKind,
    pub g: TestFn,
    pub mean: f64,
    /// Standard error of the replica mean.
    pub std_err: f64,
    pub pde: f64,
}

impl WeakRow {
    /// Deviation in units of the standard error.
    pub fn z(&self) -> f64 {
        let d = self.mean - self.pde;
        if self.std_err > 0.0 {
            d / self.std_err
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub mode: ScalingMode,
    pub model: String,
    pub oracle_flux: String,
    pub beta: f64,
    pub delta: f64,
    pub replicas: usize,
    pub seed: u64,
    pub distances: Vec<DistanceRow>,
    pub weak: Vec<WeakRow>,
    /// Largest change of a `g = 1` pairing along any single trajectory.
    pub mass_drift: f64,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    /// `(n, L1)` at checkpoint `t`, in the order of the configured `ns`.
    pub fn l1_sequence(&self, t: f64) -> Vec<(usize, f64)> {
        self.distances.iter().filter(|r| r.t == t).map(|r| (r.n, r.l1())).collect()
    }

    pub fn l1_strictly_decreasing(&self, t: f64) -> bool {
        let s = self.l1_sequence(t);
        s.len() >= 2 && s.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Largest `|z|` over all weak rows.
    pub fn max_abs_z(&self) -> f64 {
        self.weak.iter().map(|w| w.z().abs()).fold(0.0, f64::max)
    }

    pub fn weak_within(&self, k_sigma: f64) -> bool {
        self.weak.iter().all(|w| w.z().abs() <= k_sigma)
    }

    pub fn write_csv(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("distances.csv"))?;
        writeln!(f, "n,l,t,l1_rho,l1_u,linf_rho,linf_u")?;
        for r in &self.distances {
            writeln!(f, "{},{},{},{},{},{},{}", r.n, r.l, r.t, r.l1_rho, r.l1_u, r.linf_rho, r.linf_u)?;
        }
        let mut f = std::fs::File::create(dir.join("weak.csv"))?;
        writeln!(f, "n,t,field,g,mean,std_err,pde,z")?;
        for w in &self.weak {
            let field = if w.field == FieldKind::Rho { "rho" } else { "u" };
            writeln!(f, "{},{},{},{},{},{},{},{}", w.n, w.t, field, w.g, w.mean, w.std_err, w.pde, w.z())?;
        }
        Ok(())
    }

    /// One-page text summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:?} run, model {}, oracle {}, beta {}, delta {}, {} replicas, seed {}\n",
            self.mode, self.model, self.oracle_flux, self.beta, self.delta, self.replicas, self.seed
        );
        s += "     n     l       t        L1(rho)      L1(u)    Linf(rho)     Linf(u)\n";
        for r in &self.distances {
            s += &format!(
                "{:>6} {:>5} {:>7.3} {:>12.4e} {:>11.4e} {:>11.4e} {:>11.4e}\n",
                r.n, r.l, r.t, r.l1_rho, r.l1_u, r.linf_rho, r.linf_u
            );
        }
        s += &format!("weak pairings: {} rows, max |z| = {:.2}\n", self.weak.len(), self.max_abs_z());
        s += &format!("g = 1 drift along trajectories: {:e}\n", self.mass_drift);
        for n in &self.notes {
            s += &format!("note: {n}\n");
        }
        s
    }
}

/// Eulerian run: `lambda = kappa = n`, oracle with the model's own fluxes.
pub fn run_eulerian(cfg: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    if cfg.scaling.mode()? != ScalingMode::Eulerian {
        return Err(HarnessError::Invalid("run_eulerian needs the eulerian scaling mode".into()));
    }
    run(cfg)
}

/// Low-density run: fields scaled by `(n^{2 beta}, n^beta)`, oracle with the
/// limiting flux of the model's `gamma`.
pub fn run_intermediate(cfg: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    if cfg.scaling.mode()? != ScalingMode::Intermediate || !(cfg.scaling.beta > 0.0) {
        return Err(HarnessError::Invalid("run_intermediate needs the intermediate mode with beta > 0".into()));
    }
    run(cfg)
}

/// Closed-form flux matching the model's brute-force fluxes up to constants,
/// or the brute-force flux itself.
pub fn model_oracle_flux(pair: &FluxPair) -> Arc<dyn Flux> {
    let gamma = pair.gamma();
    let candidates: Vec<Arc<dyn Flux>> =
        vec![Arc::new(LimitFlux::new(1.0)), Arc::new(TwoLaneFlux { gamma: (gamma * 1e4).round() / 1e4 })];
    let (b0, b1, b2, b3) = pair.domain().bounds();
    let grid: Vec<(f64, f64)> = (1..=4)
        .flat_map(|i| (1..=4).map(move |j| (b0 + (b1 - b0) * i as f64 / 5.0, b2 + (b3 - b2) * j as f64 / 5.0)))
        .filter(|&(r, u)| pair.domain().contains_interior(r, u))
        .collect();
    'next: for c in candidates {
        let mut offset: Option<(f64, f64)> = None;
        for &(r, u) in &grid {
            let Ok((a, b)) = pair.psi_phi(r, u) else { continue 'next };
            let [p, q] = c.eval(r, u);
            let d = (a - p, b - q);
            match offset {
                None => offset = Some(d),
                Some(o) if (o.0 - d.0).abs() < 1e-9 && (o.1 - d.1).abs() < 1e-9 => {}
                Some(_) => continue 'next,
            }
        }
        if offset.is_some() {
            return c;
        }
    }
    Arc::new(twocons_pde::ModelFlux::new(pair.clone()))
}

struct Setup {
    model: SpinModel,
    flux: Arc<dyn Flux>,
    notes: Vec<String>,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, HarnessError> {
    cfg.validate()?;
    let spec: ModelSpec = cfg.model.parse()?;
    let model = build_model(&spec)?;
    let rep = validate_conditions(&model, 4);
    if !rep.all_pass() {
        return Err(HarnessError::Conditions(rep.to_string()));
    }
    let pair = macroscopic_flux(&model)?;
    let exact = model_oracle_flux(&pair);
    let mut notes = Vec::new();
    let flux: Arc<dyn Flux> = match cfg.scaling.mode()? {
        ScalingMode::Eulerian => exact,
        ScalingMode::Intermediate => {
            let g = exact.gamma();
            if g <= 1.0 {
                notes.push(format!("gamma = {g} <= 1 lies outside the regime gamma > 1 where the intermediate limit is established"));
            }
            let (lo, hi) = ScalingPlan::block_exponents(cfg.scaling.beta, cfg.scaling.delta);
            let (b, d) = (cfg.scaling.beta, cfg.scaling.delta);
            if !(2.0 * d - 8.0 * b > 1.0 && d + 3.0 * b < 1.0 && lo < hi) {
                notes.push(format!("illustrative exponents beta = {b}, delta = {d} outside the admissible region"));
            }
            Arc::new(LimitFlux::new(g))
        }
    };
    Ok(Setup { model, flux, notes })
}

/// Gradient growth beyond which the oracle solution is no longer trusted to
/// be smooth. A limited scheme caps shock slopes near `jump / dx`, so the
/// solver's own default would miss shocks on coarse grids.
pub const GRADIENT_GROWTH_LIMIT: f64 = 8.0;

/// Oracle fields at every checkpoint, after checking that the smooth solution
/// survives past the last one.
fn oracle_fields(cfg: &ExperimentConfig, flux: &dyn Flux) -> Result<Vec<(Field, Field)>, HarnessError> {
    let (rp, up) = (cfg.initial.rho, cfg.initial.u);
    let rho = move |x: f64| rp.eval(x);
    let u = move |x: f64| up.eval(x);
    let init = InitialData { rho: &rho, u: &u };
    let scheme = cfg.oracle.scheme()?;
    let t_max = cfg.t_max();
    if t_max > 0.0 {
        let mut sc = SolverConfig::new(scheme, cfg.oracle.m);
        sc.blowup_factor = GRADIENT_GROWTH_LIMIT;
        sc.snapshot_times = cfg.checkpoints.clone();
        match solve(flux, &init, t_max, &sc) {
            Ok(_) => {}
            Err(PdeError::BlowupBeforeT { time, .. }) => {
                return Err(HarnessError::CheckpointAfterBlowup { t: t_max, blowup: time })
            }
            Err(e) => return Err(e.into()),
        }
    }
    cfg.checkpoints
        .iter()
        .map(|&t| Ok(smooth_solution_oracle(flux, &init, t, cfg.oracle.m, scheme)?))
        .collect()
}

/// What one trajectory contributes: per checkpoint the block fields and the
/// weak pairings `[rho, u]` per test function.
struct Trajectory {
    fields: Vec<(Vec<f64>, Vec<f64>)>,
    pairings: Vec<Vec<[f64; 2]>>,
}

fn seed_for(seed: u64, n: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (n as u64)
}

fn trajectory(
    cfg: &ExperimentConfig,
    model: &SpinModel,
    plan: &ScalingPlan,
    gs: &[Vec<f64>],
    replica: u64,
) -> Result<Trajectory, HarnessError> {
    let (rp, up) = (cfg.initial.rho, cfg.initial.u);
    let state = sample_local_equilibrium(model, &|x| rp.eval(x), &|x| up.eval(x), plan, seed_for(cfg.seed, plan.n), replica)?;
    let (eta, zeta) = observables(model);
    let (sr, su) = plan.field_scales();
    let nf = plan.n as f64;
    let mut out = Trajectory { fields: Vec::new(), pairings: Vec::new() };
    let mut observe = |st: &twocons_sim::LatticeState| {
        let (r, u) = empirical_fields(st, model, plan, cfg.field_points);
        out.fields.push((r.values, u.values));
        let pair = gs
            .iter()
            .map(|g| {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, &s) in st.spins.iter().enumerate() {
                    a += g[j] * eta[s as usize];
                    b += g[j] * zeta[s as usize];
                }
                [sr * a / nf, su * b / nf]
            })
            .collect();
        out.pairings.push(pair);
    };
    let mut later = Vec::new();
    for &t in &cfg.checkpoints {
        if t == 0.0 {
            observe(&state);
        } else {
            later.push(t);
        }
    }
    if !later.is_empty() {
        simulate(state, model, plan, cfg.t_max(), &later, &mut observe)?;
    }
    Ok(out)
}

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let m = xs.clone().sum::<f64>() / n;
    let v = xs.map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

fn run(cfg: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    let Setup { model, flux, notes } = setup(cfg)?;
    let oracle = oracle_fields(cfg, flux.as_ref())?;
    let basis = TestFn::basis(cfg.trig_modes);
    // Observation order inside a trajectory: t = 0 first, then increasing times.
    let mut order: Vec<usize> = (0..cfg.checkpoints.len()).collect();
    order.sort_by(|&a, &b| {
        let (ta, tb) = (cfg.checkpoints[a], cfg.checkpoints[b]);
        (ta != 0.0).cmp(&(tb != 0.0)).then(ta.total_cmp(&tb))
    });
    let mut distances = Vec::new();
    let mut weak = Vec::new();
    let mut mass_drift = 0.0_f64;
    for &n in &cfg.ns {
        let plan = cfg.scaling.plan(n)?;
        let gs: Vec<Vec<f64>> = basis.iter().map(|g| (0..n).map(|j| g.eval(j as f64 / n as f64)).collect()).collect();
        let runs: Vec<Trajectory> = (0..cfg.replicas as u64)
            .into_par_iter()
            .map(|r| trajectory(cfg, &model, &plan, &gs, r))
            .collect::<Result<_, _>>()?;
        let one = basis.iter().position(|g| *g == TestFn::One).expect("basis holds g = 1");
        for tr in &runs {
            for k in 0..2 {
                let first = tr.pairings[0][one][k];
                for p in &tr.pairings {
                    mass_drift = mass_drift.max((p[one][k] - first).abs());
                }
            }
        }
        for (slot, &ci) in order.iter().enumerate() {
            let t = cfg.checkpoints[ci];
            let (orho, ou) = &oracle[ci];
            let m = cfg.field_points;
            let avg = |pick: &dyn Fn(&Trajectory) -> &Vec<f64>| -> Field {
                let mut v = vec![0.0; m];
                for tr in &runs {
                    for (a, b) in v.iter_mut().zip(pick(tr)) {
                        *a += b;
                    }
                }
                v.iter_mut().for_each(|a| *a /= runs.len() as f64);
                Field::new(v, t, FieldKind::Generic, 0.0)
            };
            let mr = avg(&|tr| &tr.fields[slot].0);
            let mu = avg(&|tr| &tr.fields[slot].1);
            distances.push(DistanceRow {
                n,
                l: plan.l,
                t,
                l1_rho: mr.l1_distance(orho),
                l1_u: mu.l1_distance(ou),
                linf_rho: mr.linf_distance(orho),
                linf_u: mu.linf_distance(ou),
            });
            for (gi, g) in basis.iter().enumerate() {
                for (k, (kind, of)) in [(FieldKind::Rho, orho), (FieldKind::U, ou)].into_iter().enumerate() {
                    let (mean, sd) = mean_sd(runs.iter().map(|tr| tr.pairings[slot][gi][k]));
                    weak.push(WeakRow {
                        n,
                        t,
                        field: kind,
                        g: *g,
                        mean,
                        std_err: sd / (runs.len() as f64).sqrt(),
                        pde: of.pair(|x| g.eval(x)),
                    });
                }
            }
        }
    }
    let report = ConvergenceReport {
        mode: cfg.scaling.mode()?,
        model: model.name.clone(),
        oracle_flux: flux.name(),
        beta: cfg.scaling.beta,
        delta: cfg.scaling.delta,
        replicas: cfg.replicas,
        seed: cfg.seed,
        distances,
        weak,
        mass_drift,
        notes,
    };
    if let Some(dir) = &cfg.out_dir {
        report.write_csv(dir)?;
        std::fs::write(dir.join("summary.txt"), report.summary())?;
    }
    Ok(report)
}
