//! Periodic grid functions on the unit torus.

use serde::{Deserialize, Serialize};

/// What a [`Field`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Rho,
    U,
    Generic,
}

/// Values at `x_k = (k + offset) / m`, `k = 0..m`, on the torus `[0, 1)`.
///
/// Particle block averages use `offset = 0`; finite-volume cell averages use
/// `offset = 0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub values: Vec<f64>,
    pub time: f64,
    pub kind: FieldKind,
    pub offset: f64,
}

impl Field {
    pub fn new(values: Vec<f64>, time: f64, kind: FieldKind, offset: f64) -> Self {
        Self { values, time, kind, offset }
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(m: usize, time: f64, kind: FieldKind, offset: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..m).map(|k| f((k as f64 + offset) / m as f64)).collect();
        Self { values, time, kind, offset }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn x(&self, k: usize) -> f64 {
        (k as f64 + self.offset) / self.m() as f64
    }

    pub fn get(&self, k: isize) -> f64 {
        let m = self.m() as isize;
        self.values[k.rem_euclid(m) as usize]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.m() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Periodic cubic (Catmull-Rom) interpolation at `x`.
    pub fn sample(&self, x: f64) -> f64 {
        let m = self.m() as f64;
        let s = x.rem_euclid(1.0) * m - self.offset;
        let k = s.floor();
        let t = s - k;
        let k = k as isize;
        let (p0, p1, p2, p3) = (self.get(k - 1), self.get(k), self.get(k + 1), self.get(k + 2));
        p1 + 0.5
            * t
            * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
    }

    /// Resamples onto `m` points with the given offset.
    pub fn resample(&self, m: usize, offset: f64) -> Field {
        Field::from_fn(m, self.time, self.kind, offset, |x| self.sample(x))
    }

    /// Discrete `L1(T)` distance to `other`, evaluated on this field's grid.
    pub fn l1_distance(&self, other: &Field) -> f64 {
        let m = self.m();
        (0..m).map(|k| (self.values[k] - other.sample(self.x(k))).abs()).sum::<f64>() / m as f64
    }

    /// Maximum pointwise distance to `other` on this field's grid.
    pub fn linf_distance(&self, other: &Field) -> f64 {
        (0..self.m())
            .map(|k| (self.values[k] - other.sample(self.x(k))).abs())
            .fold(0.0, f64::max)
    }

    /// Riemann sum of `g(x) * field(x)` over the torus.
    pub fn pair(&self, g: impl Fn(f64) -> f64) -> f64 {
        let m = self.m();
        (0..m).map(|k| g(self.x(k)) * self.values[k]).sum::<f64>() / m as f64
    }

    /// Writes `t,x,<name>` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, name: &str, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "t,x,{name}")?;
        }
        for k in 0..self.m() {
            writeln!(out, "{},{},{}", self.time, self.x(k), self.values[k])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_smooth_functions() {
        let f = Field::from_fn(64, 0.0, FieldKind::Generic, 0.5, |x| (2.0 * std::f64::consts::PI * x).sin());
        for x in [0.0, 0.1234, 0.5, 0.999] {
            let exact = (2.0 * std::f64::consts::PI * x).sin();
            assert!((f.sample(x) - exact).abs() < 1e-4);
        }
        let g = f.resample(128, 0.0);
        assert!(g.linf_distance(&f) < 1e-4);
    }

    #[test]
    fn pairing_and_mean() {
        let f = Field::from_fn(100, 0.0, FieldKind::Rho, 0.0, |_| 2.5);
        assert_eq!(f.mean(), 2.5);
        assert!((f.pair(|_| 1.0) - 2.5).abs() < 1e-15);
        assert!(f.pair(|x| (2.0 * std::f64::consts::PI * x).cos()).abs() < 1e-13);
    }
}
