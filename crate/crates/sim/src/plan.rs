//! Space-time scalings and block sizes.

use serde::{Deserialize, Serialize};

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    Eulerian,
    Intermediate,
}

/// Jump speeds `lambda = n^{1+beta}`, `kappa = n^{1+beta+delta}` and the
/// mesoscopic block length `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub mode: ScalingMode,
    pub n: usize,
    pub beta: f64,
    pub delta: f64,
    pub lambda_speed: f64,
    pub kappa_speed: f64,
    pub l: usize,
    pub strict: bool,
}

impl ScalingPlan {
    /// Eulerian scaling with `lambda = kappa = n` and `l = ceil(n^0.6)`,
    /// capped below `n/2` on tiny tori.
    pub fn eulerian(n: usize) -> Result<Self, SimError> {
        let l = ((n as f64).powf(0.6).ceil() as usize).min(n.saturating_sub(1) / 2).max(1);
        Self::build(ScalingMode::Eulerian, n, 0.0, 0.0, l, false)
    }

    /// Low-density scaling. With `strict`, the exponents must satisfy
    /// `2 delta - 8 beta > 1` and `delta + 3 beta < 1`.
    ///
    /// The default block length sits at the geometric middle of the window
    /// `n^{(1+delta+5beta)/3} << l << n^{delta-beta}`.
    pub fn intermediate(n: usize, beta: f64, delta: f64, strict: bool) -> Result<Self, SimError> {
        let (lo, hi) = Self::block_exponents(beta, delta);
        let l = (n as f64).powf(0.5 * (lo + hi)).ceil().max(2.0) as usize;
        Self::build(ScalingMode::Intermediate, n, beta, delta, l.min(n.saturating_sub(1) / 2).max(1), strict)
    }

    /// Exponents bounding the block length.
    pub fn block_exponents(beta: f64, delta: f64) -> (f64, f64) {
        ((1.0 + delta + 5.0 * beta) / 3.0, delta - beta)
    }

    pub fn with_l(mut self, l: usize) -> Result<Self, SimError> {
        self.l = l;
        self.validate()?;
        Ok(self)
    }

    fn build(mode: ScalingMode, n: usize, beta: f64, delta: f64, l: usize, strict: bool) -> Result<Self, SimError> {
        let nf = n as f64;
        let plan = Self {
            mode,
            n,
            beta,
            delta,
            lambda_speed: nf.powf(1.0 + beta),
            kappa_speed: nf.powf(1.0 + beta + delta),
            l,
            strict,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidPlan(m));
        if self.n < 2 {
            return bad(format!("torus size {} < 2", self.n));
        }
        if self.l == 0 || 2 * self.l >= self.n.max(3) {
            return bad(format!("block length {} must lie in [1, n/2)", self.l));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite() && self.delta.is_finite()) {
            return bad(format!("beta = {}, delta = {}", self.beta, self.delta));
        }
        if self.mode == ScalingMode::Eulerian && (self.beta != 0.0 || self.delta != 0.0) {
            return bad("Eulerian scaling has beta = delta = 0".into());
        }
        if self.strict {
            if 2.0 * self.delta - 8.0 * self.beta <= 1.0 {
                return bad(format!("2 delta - 8 beta = {} <= 1", 2.0 * self.delta - 8.0 * self.beta));
            }
            if self.delta + 3.0 * self.beta >= 1.0 {
                return bad(format!("delta + 3 beta = {} >= 1", self.delta + 3.0 * self.beta));
            }
        }
        Ok(())
    }

    /// Microscopic densities `(rho n^{-2 beta}, u n^{-beta})` of a macroscopic point.
    pub fn to_microscopic(&self, rho: f64, u: f64) -> (f64, f64) {
        let s = (self.n as f64).powf(self.beta);
        (rho / (s * s), u / s)
    }

    /// Field scalings `(n^{2 beta}, n^{beta})`.
    pub fn field_scales(&self) -> (f64, f64) {
        let s = (self.n as f64).powf(self.beta);
        (s * s, s)
    }
}
