//! Exhaustive conditional exponential moments of weighted block averages.
//!
//! Sites `0..=l+1` are enumerated: the block `1..=l` carries the conditioning
//! totals, and the weighted sum `(1/l) sum_{j=0}^{l} b(j/l) xi(w_j, w_{j+1})`
//! may reach one site past either end. Configurations are grouped by the
//! conserved totals of the block. Within each group we compute
//! `log E(exp{g sqrt(l) X})` exactly, where `X` is either `<b, xi>_l` with a
//! mean-zero weight or `<b, xi>_l - Xi(<b, zeta>_l)` with a unit-mass weight,
//! and fit the smallest `C` with `log E <= C (g^2 + |g| / sqrt(l))`.

use std::collections::HashMap;

use serde::Serialize;
use twocons_model::conditions::bond_currents;
use twocons_model::{site_law, SpinModel};
use twocons_sim::weight;

use crate::error::HarnessError;

/// Largest number of enumerated configurations.
pub const MAX_CONFIGS: usize = 10_000_000;

/// Stability tolerance on `max C / min C` across block lengths.
pub const STABILITY_RATIO: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Centering {
    /// Mean-zero weight, no centering.
    MeanZero,
    /// Unit-mass weight, centred by `Xi`.
    UnitMass,
}

/// The observable `xi(a, b)` on neighbouring pairs, flat `a * k + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairObservable {
    pub k: usize,
    pub values: Vec<f64>,
}

impl PairObservable {
    /// The asymmetric particle current of the model.
    pub fn current(model: &SpinModel) -> Self {
        Self { k: model.size(), values: bond_currents(model, &model.r_rates).0 }
    }

    /// A site observable seen as a pair observable on its left site.
    pub fn site(f: &[f64]) -> Self {
        let k = f.len();
        Self { k, values: (0..k * k).map(|i| f[i / k]).collect() }
    }

    fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.k + b]
    }
}

/// Mean-zero weight: the derivative of the block kernel on `[0, 1]`.
pub fn odd_weight(s: f64) -> f64 {
    let x = 2.0 * s - 1.0;
    -3.75 * x * (1.0 - x * x)
}

/// Unit-mass weight: the block kernel on `[0, 1]`.
pub fn even_weight(s: f64) -> f64 {
    2.0 * weight(2.0 * s - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub l: usize,
    pub centering: Centering,
    pub constant: f64,
    /// `(gamma, eta total, 2 zeta total)` attaining the constant.
    pub argmax: (f64, i64, i64),
    pub classes: usize,
    /// Largest `|log E|` at `gamma = 0` (zero up to rounding).
    pub gamma_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub gammas: Vec<f64>,
    pub rows: Vec<MomentRow>,
}

impl MomentReport {
    /// `max C / min C` across block lengths for one centering.
    pub fn spread(&self, c: Centering) -> f64 {
        let cs: Vec<f64> = self.rows.iter().filter(|r| r.centering == c).map(|r| r.constant).collect();
        let hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    pub fn stable(&self) -> bool {
        [Centering::MeanZero, Centering::UnitMass]
            .iter()
            .all(|&c| self.spread(c).is_finite() && self.spread(c) <= STABILITY_RATIO)
    }
}

/// `Xi(x)`: the mean of `xi` under the product of canonical site laws with
/// mean `x`, evaluated just inside the domain when `x` is on its boundary.
fn xi_mean(model: &SpinModel, xi: &PairObservable, centre: (f64, f64), x: (f64, f64)) -> Result<f64, HarnessError> {
    let mut last = None;
    for shrink in [0.0, 1e-9, 1e-7, 1e-5] {
        let p = (x.0 + shrink * (centre.0 - x.0), x.1 + shrink * (centre.1 - x.1));
        match site_law(model, p.0, p.1) {
            Ok(law) => {
                let mut acc = 0.0;
                for a in 0..xi.k {
                    for b in 0..xi.k {
                        acc += law[a] * law[b] * xi.at(a, b);
                    }
                }
                return Ok(acc);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt").into())
}

fn log_sum_exp(terms: &[(f64, f64)], g: f64) -> f64 {
    // terms: (log weight, X)
    let mx = terms.iter().map(|&(lw, x)| lw + g * x).fold(f64::NEG_INFINITY, f64::max);
    mx + terms.iter().map(|&(lw, x)| (lw + g * x - mx).exp()).sum::<f64>().ln()
}

/// Fits the constant for every `l` in `ls`, both centerings, under the
/// reference product measure of the model.
pub fn microcanonical_moment_check(
    model: &SpinModel,
    xi: &PairObservable,
    ls: &[usize],
    gammas: &[f64],
) -> Result<MomentReport, HarnessError> {
    let k = model.size();
    if xi.k != k {
        return Err(HarnessError::Invalid("observable and model state counts differ".into()));
    }
    let pi = &model.pi_ref;
    let log_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let centre = (
        (0..k).map(|w| pi[w] * model.eta_f(w)).sum::<f64>(),
        (0..k).map(|w| pi[w] * model.zeta(w)).sum::<f64>(),
    );
    let mut rows = Vec::new();
    for &l in ls {
        let sites = l + 2;
        let size = (k as f64).powi(sites as i32);
        if l < 2 || size > MAX_CONFIGS as f64 {
            return Err(HarnessError::TooLarge { size: size.min(usize::MAX as f64) as usize, limit: MAX_CONFIGS });
        }
        let size = size as usize;
        let lf = l as f64;
        let b_odd: Vec<f64> = (0..=l).map(|j| odd_weight(j as f64 / lf)).collect();
        // Normalized to unit discrete mass so that `<b, zeta>` stays in the hull.
        let b_even: Vec<f64> = {
            let v: Vec<f64> = (0..=l).map(|j| even_weight(j as f64 / lf)).collect();
            let mass = v.iter().sum::<f64>() / lf;
            v.iter().map(|x| x / mass).collect()
        };
        let mut groups: HashMap<(i64, i64), [Vec<(f64, f64)>; 2]> = HashMap::new();
        let mut cache: HashMap<(u64, u64), f64> = HashMap::new();
        let mut w = vec![0usize; sites];
        for code in 0..size {
            let mut c = code;
            for s in w.iter_mut() {
                *s = c % k;
                c /= k;
            }
            let lw: f64 = w.iter().map(|&s| log_pi[s]).sum();
            let n_tot: i64 = w[1..=l].iter().map(|&s| i64::from(model.eta[s])).sum();
            let z_tot: i64 = w[1..=l].iter().map(|&s| model.zeta_half_units(s)).sum();
            let (mut x0, mut x1, mut br, mut bz) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..=l {
                let v = xi.at(w[j], w[j + 1]);
                x0 += b_odd[j] * v;
                x1 += b_even[j] * v;
                br += b_even[j] * model.eta_f(w[j]);
                bz += b_even[j] * model.zeta(w[j]);
            }
            let (x0, x1, br, bz) = (x0 / lf, x1 / lf, br / lf, bz / lf);
            let key = (br.to_bits(), bz.to_bits());
            let centred = match cache.get(&key) {
                Some(&v) => v,
                None => {
                    let v = xi_mean(model, xi, centre, (br, bz))?;
                    cache.insert(key, v);
                    v
                }
            };
            let g = groups.entry((n_tot, z_tot)).or_insert_with(|| [Vec::new(), Vec::new()]);
            let s = lf.sqrt();
            g[0].push((lw, s * x0));
            g[1].push((lw, s * (x1 - centred)));
        }
        for (ci, centering) in [Centering::MeanZero, Centering::UnitMass].into_iter().enumerate() {
            let mut row = MomentRow { l, centering, constant: 0.0, argmax: (f64::NAN, 0, 0), classes: groups.len(), gamma_zero: 0.0 };
            let mut keys: Vec<_> = groups.keys().copied().collect();
            keys.sort_unstable();
            for key in keys {
                let terms = &groups[&key][ci];
                let norm = log_sum_exp(terms, 0.0);
                row.gamma_zero = row.gamma_zero.max((log_sum_exp(terms, 0.0) - norm).abs());
                for &g in gammas {
                    if g == 0.0 {
                        continue;
                    }
                    let log_m = log_sum_exp(terms, g) - norm;
                    let c = log_m / (g * g + g.abs() / lf.sqrt());
                    if c > row.constant {
                        row.constant = c;
                        row.argmax = (g, key.0, key.1);
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(MomentReport { gammas: gammas.to_vec(), rows })
}

/// Default `gamma` grid: 49 log-spaced magnitudes in `[0.01, 100]`, both signs.
pub fn default_gammas() -> Vec<f64> {
    (0..49).map(|i| 10f64.powf(-2.0 + i as f64 / 12.0)).flat_map(|g| [g, -g]).collect()
}
