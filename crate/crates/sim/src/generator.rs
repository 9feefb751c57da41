//! Explicit generators on small tori.

use twocons_model::{gibbs_measure, SpinModel};

use crate::error::SimError;

/// Largest state space for which generators are assembled.
pub const MAX_STATES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorPart {
    /// Asymmetric part `L` (rates `r`).
    L,
    /// Symmetric part `K` (rates `s`).
    K,
}

/// Sparse generator: off-diagonal entries and the diagonal.
#[derive(Debug, Clone)]
pub struct Generator {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub diag: Vec<f64>,
}

impl Generator {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = self.diag.clone();
        for &(i, _, v) in &self.entries {
            s[i] += v;
        }
        s
    }

    /// `p^T G`.
    pub fn left_apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = p.iter().zip(&self.diag).map(|(a, d)| a * d).collect();
        for &(i, j, v) in &self.entries {
            out[j] += p[i] * v;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.dim]; self.dim];
        for i in 0..self.dim {
            m[i][i] = self.diag[i];
        }
        for &(i, j, v) in &self.entries {
            m[i][j] += v;
        }
        m
    }

    /// `a G1 + b G2` for generators on the same space.
    pub fn combine(&self, a: f64, other: &Generator, b: f64) -> Generator {
        let mut entries: Vec<(usize, usize, f64)> = self.entries.iter().map(|&(i, j, v)| (i, j, a * v)).collect();
        entries.extend(other.entries.iter().map(|&(i, j, v)| (i, j, b * v)));
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(l) if (l.0, l.1) == (e.0, e.1) => l.2 += e.2,
                _ => merged.push(e),
            }
        }
        let diag = self.diag.iter().zip(&other.diag).map(|(x, y)| a * x + b * y).collect();
        Generator { dim: self.dim, entries: merged, diag }
    }
}

/// Configuration index with site 0 as the most significant base-`|Omega|` digit.
pub fn encode(spins: &[u8], k: usize) -> usize {
    spins.iter().fold(0, |acc, &s| acc * k + s as usize)
}

pub fn decode(mut idx: usize, k: usize, n: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for j in (0..n).rev() {
        out[j] = (idx % k) as u8;
        idx /= k;
    }
    out
}

fn state_count(k: usize, n: usize) -> Result<usize, SimError> {
    let mut size = 1usize;
    for _ in 0..n {
        size = size.saturating_mul(k);
        if size > MAX_STATES {
            return Err(SimError::TooLarge { size, limit: MAX_STATES });
        }
    }
    Ok(size)
}

/// Generator of one part of the dynamics on the periodic torus of length `n`.
pub fn generator_matrix(model: &SpinModel, n: usize, part: GeneratorPart) -> Result<Generator, SimError> {
    if n < 2 {
        return Err(SimError::InvalidPlan(format!("torus size {n} < 2")));
    }
    let k = model.size();
    let dim = state_count(k, n)?;
    let mut entries = Vec::new();
    let mut diag = vec![0.0; dim];
    for x in 0..dim {
        let mut spins = decode(x, k, n);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let jr = (j + 1) % n;
            let (a, b) = (spins[j] as usize, spins[jr] as usize);
            for c in 0..k {
                for d in 0..k {
                    if (a, b) == (c, d) {
                        continue;
                    }
                    let rate = match part {
                        GeneratorPart::L => model.r(a, b, c, d),
                        GeneratorPart::K => model.s(a, b, c, d),
                    };
                    if rate == 0.0 {
                        continue;
                    }
                    spins[j] = c as u8;
                    spins[jr] = d as u8;
                    row.push((encode(&spins, k), rate));
                    spins[j] = a as u8;
                    spins[jr] = b as u8;
                }
            }
        }
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (y, v) in row {
            match merged.last_mut() {
                Some(l) if l.0 == y => l.1 += v,
                _ => merged.push((y, v)),
            }
        }
        for (y, v) in merged {
            diag[x] -= v;
            entries.push((x, y, v));
        }
    }
    Ok(Generator { dim, entries, diag })
}

/// Product canonical measure `pi_{tau,theta}^n` on all configurations.
pub fn product_measure(model: &SpinModel, tau: f64, theta: f64, n: usize) -> Result<Vec<f64>, SimError> {
    let k = model.size();
    let dim = state_count(k, n)?;
    let p = gibbs_measure(model, tau, theta);
    Ok((0..dim).map(|x| decode(x, k, n).iter().map(|&s| p[s as usize]).product()).collect())
}

/// `max_x |(p^T G)(x)|`.
pub fn stationarity_residual(g: &Generator, p: &[f64]) -> f64 {
    g.left_apply(p).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max_{x,y} |p(x) G(x,y) - p(y) G(y,x)|`.
pub fn detailed_balance_residual(g: &Generator, p: &[f64]) -> f64 {
    let mut map = std::collections::HashMap::with_capacity(g.entries.len());
    for &(i, j, v) in &g.entries {
        map.insert((i, j), v);
    }
    map.iter().fold(0.0_f64, |m, (&(i, j), &v)| {
        let back = map.get(&(j, i)).copied().unwrap_or(0.0);
        m.max((p[i] * v - p[j] * back).abs())
    })
}
