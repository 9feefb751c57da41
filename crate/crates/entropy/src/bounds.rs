//! Fitted constants of the global bounds on the cutoff entropy.
//!
//! Each function bound reads `|lhs| <= C * weight * 1_{D3}`; the report gives the
//! smallest `C` over the `D3` nodes, where it is attained, and whether `lhs`
//! vanishes off `D3`. Two cone inclusions of the partition complete the list.

use crate::geometry::Region;
use crate::table::{EntropyPoint, EntropyTable};

/// Off-support tolerance for the indicator structure.
pub const INDICATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BoundEntry {
    pub name: String,
    pub constant: f64,
    pub argmax: (f64, f64),
    pub indicator_ok: bool,
    /// Largest `|lhs|` outside `D3`.
    pub indicator_max: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BoundReport {
    pub r_lo: f64,
    pub r_hi: f64,
    pub n: Option<f64>,
    pub cells: usize,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Every constant finite and every indicator structure respected.
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.constant.is_finite() && e.indicator_ok)
    }
}

type Ratio = Box<dyn Fn(&EntropyPoint) -> (f64, f64)>;

/// Fits the constants on every grid point of the table, both signs of `u`.
pub fn verify_bounds(table: &EntropyTable) -> BoundReport {
    let (r_lo, r_hi) = (table.meta.r_lo, table.meta.r_hi);
    let log = (r_hi / r_lo).ln();
    let flux = table.flux().clone();
    let d2 = |p: &EntropyPoint| if p.region == Region::D2 { 1.0 } else { 0.0 };
    // (name, |lhs|, weight) pairs.
    let funcs: Vec<(&str, Ratio)> = vec![
        ("s_rho", Box::new(move |p| ((p.s_rho - d2(p)).abs(), 1.0))),
        ("s_u", Box::new(move |p| (p.s_u.abs(), (r_hi.sqrt() - r_lo.sqrt()) / log))),
        ("s_rr", Box::new(move |p| (p.s_rr.abs(), 1.0 / (log * (r_lo + p.rho))))),
        ("s_ru", Box::new(move |p| (p.s_ru.abs(), 1.0 / (log * (r_lo.sqrt() + p.rho.max(0.0).sqrt() + p.u.abs()))))),
        ("s_uu", Box::new(move |p| (p.s_uu.abs(), 1.0 / log))),
        (
            "flux",
            Box::new(move |p| {
                let psi = flux.eval(p.rho, p.u)[0];
                ((p.f - psi * p.s_rho).abs(), r_hi.sqrt() * (r_hi + p.u * p.u) / log)
            }),
        ),
    ];
    let points = table.points();
    let mut entries = Vec::new();
    for (name, f) in &funcs {
        let mut e = BoundEntry { name: name.to_string(), constant: 0.0, argmax: (f64::NAN, f64::NAN), indicator_ok: true, indicator_max: 0.0 };
        for p in &points {
            let (lhs, weight) = f(p);
            if p.region == Region::D3 {
                let c = lhs / weight;
                if !(c <= e.constant) {
                    e.constant = c;
                    e.argmax = (p.rho, p.u);
                }
            } else {
                e.indicator_max = e.indicator_max.max(lhs);
            }
        }
        e.indicator_ok = e.indicator_max <= INDICATOR_TOL;
        entries.push(e);
    }
    // D3 lies in the cone above r_hi; D1 contains the cone below r_lo.
    let mut upper = BoundEntry { name: "d3_cone".into(), constant: 0.0, argmax: (f64::NAN, f64::NAN), indicator_ok: true, indicator_max: 0.0 };
    let mut lower = BoundEntry { name: "d1_cone".into(), constant: 0.0, argmax: (f64::NAN, f64::NAN), indicator_ok: true, indicator_max: 0.0 };
    for p in &points {
        let a = p.u.abs();
        if p.region == Region::D3 && p.rho > r_hi {
            let c = if a > 0.0 { (p.rho - r_hi) / (r_hi.sqrt() * a) } else { f64::INFINITY };
            if !(c <= upper.constant) {
                upper.constant = c;
                upper.argmax = (p.rho, p.u);
            }
        }
        if p.region != Region::D1 && p.rho < r_lo {
            let c = if a > 0.0 { (r_lo - p.rho) / (r_lo.sqrt() * a) } else { f64::INFINITY };
            if !(c <= lower.constant) {
                lower.constant = c;
                lower.argmax = (p.rho, p.u);
            }
        }
    }
    entries.push(upper);
    entries.push(lower);
    BoundReport { r_lo, r_hi, n: table.meta.n, cells: table.lattice().cells, entries }
}
