//! Structural conditions on the rate tables.
//!
//! Every check is exhaustive over the relevant tuples of site states and
//! reports its maximal residual; nothing here returns an error.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::model::SpinModel;

/// Default tolerance for identities that are exact up to rounding.
pub const EXACT_TOL: f64 = 1e-12;

/// Outcome of a single condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub pass: bool,
    pub residual: f64,
}

impl ConditionResult {
    fn from_residual(residual: f64, tol: f64) -> Self {
        Self { pass: residual <= tol, residual }
    }
}

/// Irreducibility on the level sets of `(N, Z)` for a torus of length `block_len`.
#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibilityResult {
    pub pass: bool,
    pub block_len: usize,
    pub level_sets: usize,
    /// Level sets that are not strongly connected, as `(N, 2Z)`.
    pub disconnected: Vec<(i64, i64)>,
}

/// Full report of the conditions on a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub conservation: ConditionResult,
    pub irreducibility: IrreducibilityResult,
    pub lr_symmetry: ConditionResult,
    pub asym_stationarity: ConditionResult,
    pub sym_reversibility: ConditionResult,
    pub gradient_flux: ConditionResult,
    /// Site functions with `psi^s(a,b) = kappa(a) - kappa(b)`.
    pub kappa: Vec<f64>,
    /// Site functions with `phi^s(a,b) = chi(a) - chi(b)`.
    pub chi: Vec<f64>,
}

impl ConditionReport {
    /// Conditions (A), (C), (D), (E) and (F) all pass.
    pub fn structural_pass(&self) -> bool {
        self.conservation.pass
            && self.lr_symmetry.pass
            && self.asym_stationarity.pass
            && self.sym_reversibility.pass
            && self.gradient_flux.pass
    }

    pub fn all_pass(&self) -> bool {
        self.structural_pass() && self.irreducibility.pass
    }
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let line = |f: &mut std::fmt::Formatter<'_>, name: &str, r: &ConditionResult| {
            writeln!(f, "{name:<22} {} residual={:.3e}", if r.pass { "PASS" } else { "FAIL" }, r.residual)
        };
        line(f, "(A) conservation", &self.conservation)?;
        writeln!(
            f,
            "{:<22} {} block_len={} level_sets={} disconnected={}",
            "(B) irreducibility",
            if self.irreducibility.pass { "PASS" } else { "FAIL" },
            self.irreducibility.block_len,
            self.irreducibility.level_sets,
            self.irreducibility.disconnected.len()
        )?;
        line(f, "(C) lr_symmetry", &self.lr_symmetry)?;
        line(f, "(D) asym_stationarity", &self.asym_stationarity)?;
        line(f, "(E) sym_reversibility", &self.sym_reversibility)?;
        line(f, "(F) gradient_flux", &self.gradient_flux)?;
        writeln!(f, "kappa = {:?}", self.kappa)?;
        write!(f, "chi   = {:?}", self.chi)
    }
}

/// Runs all condition checks.
pub fn validate_conditions(model: &SpinModel, block_len: usize) -> ConditionReport {
    let (gradient_flux, kappa, chi) = gradient_condition(model);
    ConditionReport {
        conservation: ConditionResult::from_residual(conservation_residual(model), EXACT_TOL),
        irreducibility: irreducibility(model, block_len),
        lr_symmetry: ConditionResult::from_residual(lr_symmetry_residual(model), EXACT_TOL),
        asym_stationarity: ConditionResult::from_residual(cycle_residual(model), EXACT_TOL),
        sym_reversibility: ConditionResult::from_residual(reversibility_residual(model), EXACT_TOL),
        gradient_flux,
        kappa,
        chi,
    }
}

fn for_each_quad(k: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                for d in 0..k {
                    f(a, b, c, d);
                }
            }
        }
    }
}

/// (A): positive-rate jumps preserve `eta_1 + eta_2` and `zeta_1 + zeta_2`.
pub fn conservation_residual(model: &SpinModel) -> f64 {
    let mut res: f64 = 0.0;
    for_each_quad(model.size(), |a, b, c, d| {
        if model.r(a, b, c, d) > 0.0 || model.s(a, b, c, d) > 0.0 {
            let de = (model.eta_f(a) + model.eta_f(b) - model.eta_f(c) - model.eta_f(d)).abs();
            let dz = (model.zeta(a) + model.zeta(b) - model.zeta(c) - model.zeta(d)).abs();
            res = res.max(de).max(dz);
        }
    });
    res
}

/// (C): `r(Rb, Ra; Rd, Rc) = r(a, b; c, d)`.
pub fn lr_symmetry_residual(model: &SpinModel) -> f64 {
    let rr = &model.involution;
    let mut res: f64 = 0.0;
    for_each_quad(model.size(), |a, b, c, d| {
        res = res.max((model.r(rr[b], rr[a], rr[d], rr[c]) - model.r(a, b, c, d)).abs());
    });
    res
}

/// The stationarity defect `Q(a, b)` of the asymmetric rates.
pub fn q_defect(model: &SpinModel, a: usize, b: usize) -> f64 {
    let k = model.size();
    let pi = &model.pi_ref;
    let mut q = 0.0;
    for c in 0..k {
        for d in 0..k {
            q += pi[c] * pi[d] / (pi[a] * pi[b]) * model.r(c, d, a, b) - model.r(a, b, c, d);
        }
    }
    q
}

/// (D): `Q(a,b) + Q(b,c) + Q(c,a) = 0` over all triples.
pub fn cycle_residual(model: &SpinModel) -> f64 {
    let k = model.size();
    let q: Vec<Vec<f64>> = (0..k).map(|a| (0..k).map(|b| q_defect(model, a, b)).collect()).collect();
    let mut res: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                res = res.max((q[a][b] + q[b][c] + q[c][a]).abs());
            }
        }
    }
    res
}

/// (E): detailed balance of `s` with respect to `pi x pi`.
pub fn reversibility_residual(model: &SpinModel) -> f64 {
    let pi = &model.pi_ref;
    let mut res: f64 = 0.0;
    for_each_quad(model.size(), |a, b, c, d| {
        let lhs = pi[a] * pi[b] * model.s(a, b, c, d);
        let rhs = pi[c] * pi[d] * model.s(c, d, a, b);
        res = res.max((lhs - rhs).abs());
    });
    res
}

/// Microscopic bond currents of a rate table: `(psi, phi)` indexed `a * k + b`.
pub fn bond_currents(model: &SpinModel, rates: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = model.size();
    let mut psi = vec![0.0; k * k];
    let mut phi = vec![0.0; k * k];
    for_each_quad(k, |a, b, c, d| {
        let r = rates[model.idx(a, b, c, d)];
        if r != 0.0 {
            psi[a * k + b] += r * (model.eta_f(d) - model.eta_f(b));
            phi[a * k + b] += r * (model.zeta(d) - model.zeta(b));
        }
    });
    (psi, phi)
}

/// (F): least-squares gradient fit of the symmetric currents.
///
/// `kappa` is pinned to zero on empty sites; `chi` is the minimum-norm
/// solution.
pub fn gradient_condition(model: &SpinModel) -> (ConditionResult, Vec<f64>, Vec<f64>) {
    let k = model.size();
    let (psis, phis) = bond_currents(model, &model.s_rates);
    let fit = |target: &[f64], free: &[usize]| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; k];
        if free.is_empty() {
            let res = target.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            return (out, res);
        }
        let col = |w: usize| free.iter().position(|&f| f == w);
        let mut a = DMatrix::<f64>::zeros(k * k, free.len());
        for x in 0..k {
            for y in 0..k {
                if let Some(j) = col(x) {
                    a[(x * k + y, j)] += 1.0;
                }
                if let Some(j) = col(y) {
                    a[(x * k + y, j)] -= 1.0;
                }
            }
        }
        let b = DVector::from_column_slice(target);
        let svd = a.clone().svd(true, true);
        let sol = svd.solve(&b, 1e-12).expect("SVD with U and V");
        let r = &a * &sol - &b;
        for (j, &w) in free.iter().enumerate() {
            out[w] = sol[j];
        }
        (out, r.amax())
    };
    let free_kappa: Vec<usize> = (0..k).filter(|&w| model.eta[w] != 0).collect();
    let all: Vec<usize> = (0..k).collect();
    let (kappa, r1) = fit(&psis, &free_kappa);
    let (chi, r2) = fit(&phis, &all);
    (ConditionResult::from_residual(r1.max(r2), EXACT_TOL), kappa, chi)
}

/// (B): every level set of `(N, Z)` on the torus of length `len` is strongly
/// connected under positive-rate bond moves.
pub fn irreducibility(model: &SpinModel, len: usize) -> IrreducibilityResult {
    let k = model.size();
    assert!(len >= 2 && (k as f64).powi(len as i32) <= 2e7, "block length too large");
    let total = k.pow(len as u32);
    let decode = |mut x: usize| -> Vec<usize> {
        let mut v = vec![0; len];
        for slot in v.iter_mut() {
            *slot = x % k;
            x /= k;
        }
        v
    };
    let encode = |v: &[usize]| v.iter().rev().fold(0usize, |acc, &d| acc * k + d);
    let moves: Vec<Vec<usize>> = (0..k * k)
        .map(|ab| {
            let (a, b) = (ab / k, ab % k);
            (0..k * k)
                .filter(|&cd| {
                    let (c, d) = (cd / k, cd % k);
                    cd != ab && model.r(a, b, c, d) + model.s(a, b, c, d) > 0.0
                })
                .collect()
        })
        .collect();
    let neighbours = |x: usize, out: &mut Vec<usize>| {
        out.clear();
        let v = decode(x);
        for j in 0..len {
            let j2 = (j + 1) % len;
            for &cd in &moves[v[j] * k + v[j2]] {
                let mut w = v.clone();
                w[j] = cd / k;
                w[j2] = cd % k;
                out.push(encode(&w));
            }
        }
    };
    let mut sets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for x in 0..total {
        let v = decode(x);
        let n: i64 = v.iter().map(|&w| i64::from(model.eta[w])).sum();
        let z: i64 = v.iter().map(|&w| model.zeta_half_units(w)).sum();
        sets.entry((n, z)).or_default().push(x);
    }
    // Forward and backward reachability from one member certify strong connectivity.
    let mut rev: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut buf = Vec::new();
    for x in 0..total {
        neighbours(x, &mut buf);
        for &y in &buf {
            rev.entry(y).or_default().push(x);
        }
    }
    let reach = |start: usize, forward: bool| -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut q = VecDeque::from([start]);
        seen.insert(start);
        let mut buf = Vec::new();
        while let Some(x) = q.pop_front() {
            if forward {
                neighbours(x, &mut buf);
            } else {
                buf.clear();
                if let Some(v) = rev.get(&x) {
                    buf.extend_from_slice(v);
                }
            }
            for &y in &buf {
                if seen.insert(y) {
                    q.push_back(y);
                }
            }
        }
        seen.len()
    };
    let mut disconnected = Vec::new();
    let mut keys: Vec<_> = sets.keys().cloned().collect();
    keys.sort();
    for key in &keys {
        let members = &sets[key];
        let start = members[0];
        if reach(start, true) != members.len() || reach(start, false) != members.len() {
            disconnected.push(*key);
        }
    }
    IrreducibilityResult { pass: disconnected.is_empty(), block_len: len, level_sets: keys.len(), disconnected }
}
