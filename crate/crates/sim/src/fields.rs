//! Block averages and empirical density fields.

use std::io::Write;

use twocons_model::{Field, FieldKind, SpinModel};

use crate::plan::ScalingPlan;
use crate::state::LatticeState;

/// Weight `a(x) = (15/16)(1 - x^2)^2` on `(-1, 1)`: even, unit mass, `C^2`,
/// and `a'^2 <= C a`.
pub fn weight(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - x * x;
        15.0 / 16.0 * q * q
    }
}

/// `(1/l) sum_j a((n x - j)/l) xi_j` with `xi` given per site state.
pub fn block_average(state: &LatticeState, xi: &[f64], l: usize, x: f64) -> f64 {
    let n = state.n() as i64;
    let c = state.n() as f64 * x;
    let lf = l as f64;
    let lo = (c - lf).floor() as i64;
    let hi = (c + lf).ceil() as i64;
    let mut acc = 0.0;
    for j in lo..=hi {
        let w = weight((c - j as f64) / lf);
        if w > 0.0 {
            acc += w * xi[state.spins[j.rem_euclid(n) as usize] as usize];
        }
    }
    acc / lf
}

/// Per-state values of `eta` and `zeta`.
pub fn observables(model: &SpinModel) -> (Vec<f64>, Vec<f64>) {
    let k = model.size();
    ((0..k).map(|w| model.eta_f(w)).collect(), (0..k).map(|w| model.zeta(w)).collect())
}

/// Scaled block averages `(n^{2 beta} eta-hat, n^beta zeta-hat)` at `x = k/m`.
pub fn empirical_fields(state: &LatticeState, model: &SpinModel, plan: &ScalingPlan, m: usize) -> (Field, Field) {
    let (eta, zeta) = observables(model);
    let (sr, su) = plan.field_scales();
    let rho = Field::from_fn(m, state.time, FieldKind::Rho, 0.0, |x| sr * block_average(state, &eta, plan.l, x));
    let u = Field::from_fn(m, state.time, FieldKind::U, 0.0, |x| su * block_average(state, &zeta, plan.l, x));
    (rho, u)
}

/// Writes `t,x,rho_hat,u_hat` rows for a sequence of snapshots.
pub fn write_fields_csv<W: Write>(mut out: W, snapshots: &[(Field, Field)]) -> std::io::Result<()> {
    writeln!(out, "t,x,rho_hat,u_hat")?;
    for (r, u) in snapshots {
        for k in 0..r.m() {
            writeln!(out, "{},{},{},{}", r.time, r.x(k), r.values[k], u.values[k])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_has_unit_mass() {
        let k = 200_000;
        let s: f64 = (0..k).map(|i| weight(-1.0 + 2.0 * (i as f64 + 0.5) / k as f64)).sum::<f64>() * 2.0 / k as f64;
        assert!((s - 1.0).abs() < 1e-9);
        assert_eq!(weight(1.0), 0.0);
        assert_eq!(weight(0.3), weight(-0.3));
    }
}
