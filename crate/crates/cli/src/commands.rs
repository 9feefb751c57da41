//! The subcommands. Each writes its outputs and a manifest, prints a short
//! report, and returns `Failed` when its asserted property does not hold.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use twocons_entropy::{flux_compatibility, residual_check, EntropyConfig};
use twocons_harness::{
    microcanonical_moment_check, model_oracle_flux, run_eulerian, run_intermediate, tail_checks, Centering,
    ExperimentConfig, PairObservable, ScalingSettings, TailSettings,
};
use twocons_model::{build_model, CustomModel, flux::onsager_residual_with, macroscopic_flux, validate_conditions, ModelSpec, SpinModel};
use twocons_pde::{solve, Flux, InitialData, LimitFlux, PdeError, Scheme, SolverConfig, TwoLaneFlux};
use twocons_sim::{empirical_fields, sample_local_equilibrium, write_fields_csv, ScalingMode};

use crate::settings::{
    EntropySettings, EnumerateSettings, FluxesSettings, SimulateSettings, SolvePdeSettings, TailsSettings,
    ValidateSettings,
};
use crate::{manifest, write_text, CliError, Context};

/// Residual above which the Onsager relation is reported as failing.
pub const ONSAGER_TOL: f64 = 1e-8;
/// Relative residual of the entropy equation accepted at the default grid.
pub const ENTROPY_RESIDUAL_TOL: f64 = 1e-4;
pub const COMPAT_TOL: f64 = 1e-3;
/// Weak pairings must lie within this many standard errors.
pub const WEAK_SIGMAS: f64 = 3.0;

/// A built-in name, or a path to a TOML model description.
fn model(name: &str) -> Result<SpinModel, CliError> {
    let usage = |e: &dyn std::fmt::Display| CliError::Usage(format!("model `{name}`: {e}"));
    let spec = if name.ends_with(".toml") {
        let text = std::fs::read_to_string(name).map_err(|e| usage(&e))?;
        ModelSpec::Custom(CustomModel::parse(&text).map_err(|e| usage(&e))?)
    } else {
        name.parse().map_err(|e| usage(&e))?
    };
    Ok(build_model(&spec)?)
}

fn finish<S: serde::Serialize>(ctx: &Context, settings: &S, outputs: &[PathBuf], failure: Option<String>) -> Result<(), CliError> {
    let m = manifest::write(ctx, settings, outputs, failure.is_none())?;
    println!("wrote {} file(s) and {}", outputs.len(), m.display());
    match failure {
        None => Ok(()),
        Some(f) => Err(CliError::Failed(f)),
    }
}

pub fn validate(ctx: &Context, s: ValidateSettings) -> Result<(), CliError> {
    let m = model(&s.model)?;
    if s.block_len < 2 {
        return Err(CliError::Usage("block_len must be at least 2".into()));
    }
    let report = validate_conditions(&m, s.block_len);
    let text = format!("model {}\n{report}\n", m.name);
    print!("{text}");
    let out = write_text(&ctx.out, "conditions.txt", &text)?;
    let failure = (!report.all_pass()).then(|| format!("model {} fails a structural condition", m.name));
    finish(ctx, &s, &[out], failure)
}

pub fn fluxes(ctx: &Context, s: FluxesSettings) -> Result<(), CliError> {
    let m = model(&s.model)?;
    if s.grid < 2 {
        return Err(CliError::Usage("grid must be at least 2".into()));
    }
    let fp = macroscopic_flux(&m)?;
    let (r0, r1, u0, u1) = fp.domain().bounds();
    let axis = |a: f64, b: f64| -> Vec<f64> { (0..s.grid).map(|i| a + (b - a) * (i as f64 + 0.5) / s.grid as f64).collect() };
    let (rhos, us) = (axis(r0, r1), axis(u0, u1));
    let path = ctx.path("fluxes.csv");
    fp.write_csv(std::fs::File::create(&path)?, &rhos, &us)?;
    let mut worst = 0.0f64;
    for &r in &rhos {
        for &u in &us {
            if fp.domain().depth(r, u) > 1e-3 {
                worst = worst.max(onsager_residual_with(&fp, r, u)?);
            }
        }
    }
    println!("model {}: gamma = {:.6}, max Onsager residual {worst:.3e}", m.name, fp.gamma());
    let failure = (worst >= ONSAGER_TOL).then(|| format!("Onsager residual {worst:e} >= {ONSAGER_TOL:e}"));
    finish(ctx, &s, &[path], failure)
}

fn times(t_end: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| t_end * k as f64 / count as f64).collect()
}

pub fn simulate(ctx: &Context, s: SimulateSettings) -> Result<(), CliError> {
    let m = model(&s.model)?;
    let scaling = ScalingSettings { mode: s.mode.clone(), beta: s.beta, delta: s.delta, block_exponent: None };
    let mut plan = scaling.plan(s.n).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(l) = s.block_len {
        plan = plan.with_l(l).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if !(s.t_end > 0.0) || s.snapshots == 0 || s.field_points < 2 {
        return Err(CliError::Usage("t_end, snapshots and field_points must be positive".into()));
    }
    if s.replicas == 0 {
        return Err(CliError::Usage("replicas must be at least 1".into()));
    }
    let (rho, u) = (s.rho(), s.u());
    let run_one = |replica: u64| -> Result<_, CliError> {
        let state = sample_local_equilibrium(&m, &|x| rho.eval(x), &|x| u.eval(x), &plan, ctx.seed, replica)?;
        let t0 = state.totals();
        let mut snaps = vec![empirical_fields(&state, &m, &plan, s.field_points)];
        let end = twocons_sim::simulate(state, &m, &plan, s.t_end, &times(s.t_end, s.snapshots), &mut |st| {
            snaps.push(empirical_fields(st, &m, &plan, s.field_points))
        })?;
        Ok((t0, snaps, end))
    };
    let runs: Vec<_> =
        (s.replica..s.replica + s.replicas as u64).into_par_iter().map(run_one).collect::<Result<_, _>>()?;
    // Replica-mean fields; a single replica is written as is.
    let mut mean = runs[0].1.clone();
    for (_, snaps, _) in &runs[1..] {
        for ((mr, mu), (r, u)) in mean.iter_mut().zip(snaps) {
            mr.values.iter_mut().zip(&r.values).for_each(|(a, b)| *a += b);
            mu.values.iter_mut().zip(&u.values).for_each(|(a, b)| *a += b);
        }
    }
    let k = runs.len() as f64;
    for (r, u) in &mut mean {
        r.values.iter_mut().chain(u.values.iter_mut()).for_each(|v| *v /= k);
    }
    let fields = ctx.path("fields.csv");
    write_fields_csv(std::io::BufWriter::new(std::fs::File::create(&fields)?), &mean)?;
    let mut outputs = vec![fields];
    let mut failure = None;
    for (i, (t0, _, end)) in runs.iter().enumerate() {
        let replica = s.replica + i as u64;
        let name = if s.replicas == 1 { "final.dump".to_string() } else { format!("final-{replica}.dump") };
        let dump = ctx.path(&name);
        end.write_dump(&m, std::fs::File::create(&dump)?)?;
        outputs.push(dump);
        println!(
            "replica {replica}: n {} l {} speeds ({}, {}), totals {:?} -> {:?}, event hash {}",
            plan.n,
            plan.l,
            plan.lambda_speed,
            plan.kappa_speed,
            t0,
            end.totals(),
            end.event_hash()
        );
        if end.totals() != *t0 {
            failure = Some(format!("conserved totals changed in replica {replica}"));
        }
    }
    finish(ctx, &s, &outputs, failure)
}

pub fn solve_pde(ctx: &Context, s: SolvePdeSettings) -> Result<(), CliError> {
    let flux: Arc<dyn Flux> = match (s.gamma, &s.model) {
        (Some(g), None) => Arc::new(LimitFlux::new(g)),
        (None, Some(name)) => model_oracle_flux(&macroscopic_flux(&model(name)?)?),
        _ => return Err(CliError::Usage("give exactly one of gamma and model".into())),
    };
    let scheme: Scheme = s.scheme.parse().map_err(CliError::Usage)?;
    if s.m < 16 || !(s.t_end > 0.0) || s.snapshots == 0 {
        return Err(CliError::Usage("m >= 16, t_end > 0 and snapshots > 0 are required".into()));
    }
    let (rho, u) = (s.rho(), s.u());
    let (rf, uf) = (move |x: f64| rho.eval(x), move |x: f64| u.eval(x));
    let init = InitialData { rho: &rf, u: &uf };
    let mut cfg = SolverConfig::new(scheme, s.m);
    cfg.snapshot_times = times(s.t_end, s.snapshots);
    let path = ctx.path("pde.csv");
    let (run, failure) = match solve(flux.as_ref(), &init, s.t_end, &cfg) {
        Ok(run) => (run, None),
        Err(PdeError::BlowupBeforeT { time, run }) => (*run, Some(format!("gradient blow-up at t = {time}"))),
        Err(e) => return Err(e.into()),
    };
    run.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!(
        "{} with {:?}, m {}: {} steps, max CFL {:.3}, {} snapshots",
        flux.name(),
        run.scheme,
        run.m,
        run.steps,
        run.max_cfl,
        run.snapshots.len()
    );
    finish(ctx, &s, &[path], failure)
}

fn entropy_table(s: &EntropySettings) -> Result<twocons_entropy::EntropyTable, CliError> {
    let mut cfg = EntropyConfig::new(s.r_lo, s.r_hi()).with_cells(s.cells);
    let flux: Arc<dyn Flux> = match s.n {
        Some(n) => {
            cfg = cfg.with_scaling(n, s.beta);
            Arc::new(TwoLaneFlux { gamma: s.gamma })
        }
        None => Arc::new(LimitFlux::new(s.gamma)),
    };
    twocons_entropy::build_entropy(flux, &cfg).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn build_entropy(ctx: &Context, s: EntropySettings) -> Result<(), CliError> {
    let table = entropy_table(&s)?;
    let path = ctx.path("entropy.csv");
    table.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    let res = residual_check(&table);
    let compat = flux_compatibility(&table);
    println!(
        "{} points; entropy equation residual {:.3e} (relative), flux compatibility {:.3e} (relative)",
        table.points().len(),
        res.relative,
        compat.relative
    );
    let failure = (res.relative >= ENTROPY_RESIDUAL_TOL || compat.relative >= COMPAT_TOL)
        .then(|| format!("residual {:e} or compatibility {:e} above tolerance", res.relative, compat.relative));
    finish(ctx, &s, &[path], failure)
}

pub fn verify_bounds(ctx: &Context, s: EntropySettings) -> Result<(), CliError> {
    let report = verify_bounds_report(&s)?;
    let path = ctx.path("bounds.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    for e in &report.entries {
        println!(
            "{:<8} C = {:<12.5} at ({:.4}, {:.4})  off-support max {:.1e}",
            e.name, e.constant, e.argmax.0, e.argmax.1, e.indicator_max
        );
    }
    let failure = (!report.all_hold()).then(|| "a bound constant is infinite or a support is violated".to_string());
    finish(ctx, &s, &[path], failure)
}

fn verify_bounds_report(s: &EntropySettings) -> Result<twocons_entropy::BoundReport, CliError> {
    Ok(twocons_entropy::verify_bounds(&entropy_table(s)?))
}

pub fn converge(ctx: &Context, cfg: ExperimentConfig) -> Result<(), CliError> {
    let mode = cfg.scaling.mode().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = match mode {
        ScalingMode::Eulerian => run_eulerian(&cfg)?,
        ScalingMode::Intermediate => run_intermediate(&cfg)?,
    };
    let dir = cfg.out_dir.clone().unwrap_or_else(|| ctx.out.clone());
    report.write_csv(&dir)?;
    let summary = report.summary();
    print!("{summary}");
    let mut outputs = vec![dir.join("distances.csv"), dir.join("weak.csv")];
    outputs.push(write_text(&dir, "summary.txt", &summary)?);
    let t_last = cfg.t_max();
    let mut failures = Vec::new();
    if report.mass_drift != 0.0 {
        failures.push(format!("g = 1 pairing drifted by {:e}", report.mass_drift));
    }
    if !report.weak_within(WEAK_SIGMAS) {
        failures.push(format!("weak pairing outside {WEAK_SIGMAS} sigma (max |z| {:.2})", report.max_abs_z()));
    }
    if mode == ScalingMode::Eulerian && cfg.ns.len() > 1 && !report.l1_strictly_decreasing(t_last) {
        failures.push(format!("L1 distance at t = {t_last} not strictly decreasing in n"));
    }
    let failure = (!failures.is_empty()).then(|| failures.join("; "));
    finish(ctx, &cfg, &outputs, failure)
}

pub fn tails(ctx: &Context, s: TailsSettings) -> Result<(), CliError> {
    let m = model(&s.model)?;
    let scaling = ScalingSettings { mode: "intermediate".into(), beta: s.beta, delta: s.delta, block_exponent: None };
    let plan = scaling.plan(s.n).and_then(|p| Ok(p.with_l(s.block_len)?)).map_err(|e| CliError::Usage(e.to_string()))?;
    let settings = TailSettings {
        training: s.training,
        test: s.test,
        levels: s.levels,
        min_exceedances: s.min_exceedances,
        seed: ctx.seed,
    };
    let r = tail_checks(&m, &plan, s.rho, s.u, &settings)?;
    let path = ctx.path("tails.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "field,z,empirical,ci_low,bound,violation")?;
    for l in &r.levels {
        writeln!(f, "{},{},{},{},{},{}", l.field, l.z, l.empirical, l.ci_low, l.bound, l.violation)?;
    }
    f.flush()?;
    drop(f);
    println!(
        "L = {:.3}; fitted C: rho {:.4}, u {:.4}; {} test blocks; violation rate {:.3}",
        r.big_l,
        r.c_rho,
        r.c_u,
        r.blocks,
        r.violation_rate()
    );
    let failure = (!r.holds()).then(|| format!("violation rate {:.3} above 5%", r.violation_rate()));
    finish(ctx, &s, &[path], failure)
}

pub fn enumerate(ctx: &Context, s: EnumerateSettings) -> Result<(), CliError> {
    let m = model(&s.model)?;
    let r = microcanonical_moment_check(&m, &PairObservable::current(&m), &s.block_lens, &twocons_harness::default_gammas())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let path = ctx.path("moments.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "l,centering,constant,gamma_at_max,eta_total,two_zeta_total,classes")?;
    for row in &r.rows {
        let c = match row.centering {
            Centering::MeanZero => "mean_zero",
            Centering::UnitMass => "unit_mass",
        };
        writeln!(f, "{},{c},{},{},{},{},{}", row.l, row.constant, row.argmax.0, row.argmax.1, row.argmax.2, row.classes)?;
        println!("l {:>2} {c:<9} C = {:.4} (gamma {:.3})", row.l, row.constant, row.argmax.0);
    }
    f.flush()?;
    drop(f);
    let (a, b) = (r.spread(Centering::MeanZero), r.spread(Centering::UnitMass));
    println!("max C / min C: mean-zero {a:.3}, unit-mass {b:.3}");
    let failure = (!r.stable()).then(|| format!("constants not stable across block lengths ({a:.3}, {b:.3})"));
    finish(ctx, &s, &[path], failure)
}
