//! Experiment descriptions shared by the convergence runs and the CLI.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use twocons_pde::Scheme;
use twocons_sim::{ScalingMode, ScalingPlan};

use crate::error::HarnessError;

/// `mean + sin_amp sin(2 pi x) + cos_amp cos(2 pi x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub mean: f64,
    #[serde(default)]
    pub sin_amp: f64,
    #[serde(default)]
    pub cos_amp: f64,
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        self.mean + self.sin_amp * (TAU * x).sin() + self.cos_amp * (TAU * x).cos()
    }

    pub fn max_abs(&self) -> f64 {
        self.mean.abs() + self.sin_amp.hypot(self.cos_amp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSettings {
    /// `eulerian` or `intermediate`.
    pub mode: String,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub delta: f64,
    /// Block length `ceil(n^e)`; the plan default when absent.
    #[serde(default)]
    pub block_exponent: Option<f64>,
}

impl ScalingSettings {
    pub fn mode(&self) -> Result<ScalingMode, HarnessError> {
        match self.mode.as_str() {
            "eulerian" => Ok(ScalingMode::Eulerian),
            "intermediate" => Ok(ScalingMode::Intermediate),
            m => Err(HarnessError::Invalid(format!("unknown scaling mode `{m}`"))),
        }
    }

    /// The plan used at torus size `n`.
    pub fn plan(&self, n: usize) -> Result<ScalingPlan, HarnessError> {
        let plan = match self.mode()? {
            ScalingMode::Eulerian => ScalingPlan::eulerian(n)?,
            ScalingMode::Intermediate => ScalingPlan::intermediate(n, self.beta, self.delta, false)?,
        };
        Ok(match self.block_exponent {
            Some(e) => plan.with_l((n as f64).powf(e).ceil() as usize)?,
            None => plan,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    /// `muscl` or `central4`.
    pub scheme: String,
    /// Coarse grid of the Richardson pair `(m, 2m)`.
    pub m: usize,
}

impl OracleSettings {
    pub fn scheme(&self) -> Result<Scheme, HarnessError> {
        self.scheme.parse().map_err(HarnessError::Invalid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSettings {
    pub rho: Profile,
    pub u: Profile,
}

/// One convergence experiment. Reports are a deterministic function of the
/// config, seed included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `pm1`, `two-lane` or `two-lane:<gamma>`.
    pub model: String,
    pub ns: Vec<usize>,
    pub replicas: usize,
    /// Observation times; `0` is allowed.
    pub checkpoints: Vec<f64>,
    /// Test functions `1, sin(2 pi k x), cos(2 pi k x)` for `k <= trig_modes`.
    pub trig_modes: usize,
    /// Points at which block fields are evaluated.
    pub field_points: usize,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub scaling: ScalingSettings,
    pub oracle: OracleSettings,
    pub initial: InitialSettings,
}

impl ExperimentConfig {
    /// The desk-scale Eulerian experiment on the `{-1, 0, +1}` model.
    ///
    /// Blocks of length `n^0.8` and 96 replicas keep the replica-mean error
    /// dominated by the deterministic smoothing bias, which decreases in `n`;
    /// shorter blocks leave it dominated by sampling noise.
    pub fn eulerian_default() -> Self {
        Self {
            model: "pm1".into(),
            ns: vec![256, 512, 1024, 2048],
            replicas: 96,
            checkpoints: vec![0.0, 0.1, 0.2],
            trig_modes: 1,
            field_points: 128,
            seed: 1,
            out_dir: None,
            scaling: ScalingSettings { mode: "eulerian".into(), beta: 0.0, delta: 0.0, block_exponent: Some(0.8) },
            oracle: OracleSettings { scheme: "muscl".into(), m: 512 },
            initial: InitialSettings {
                rho: Profile { mean: 0.5, sin_amp: 0.1, cos_amp: 0.0 },
                u: Profile { mean: 0.0, sin_amp: 0.0, cos_amp: 0.1 },
            },
        }
    }

    /// Low-density run of the same data with illustrative exponents.
    pub fn intermediate_default() -> Self {
        Self {
            ns: vec![1024, 2048],
            replicas: 48,
            scaling: ScalingSettings { mode: "intermediate".into(), beta: 0.1, delta: 0.1, block_exponent: None },
            ..Self::eulerian_default()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Invalid(m.to_string()));
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 8) {
            return bad("ns must be non-empty with every n >= 8");
        }
        if self.replicas < 2 {
            return bad("at least two replicas are needed for error bars");
        }
        if self.checkpoints.is_empty() || self.checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("checkpoints must be finite and nonnegative");
        }
        if self.field_points < 8 {
            return bad("field_points must be at least 8");
        }
        if self.oracle.m < 16 {
            return bad("oracle grid must have at least 16 cells");
        }
        self.oracle.scheme()?;
        for &n in &self.ns {
            self.scaling.plan(n)?;
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.checkpoints.iter().copied().fold(0.0, f64::max)
    }
}

/// Weak-convergence test functions on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFn {
    One,
    Sin(u32),
    Cos(u32),
}

impl TestFn {
    pub fn basis(modes: usize) -> Vec<TestFn> {
        let mut v = vec![TestFn::One];
        for k in 1..=modes as u32 {
            v.push(TestFn::Sin(k));
            v.push(TestFn::Cos(k));
        }
        v
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFn::One => 1.0,
            TestFn::Sin(k) => (TAU * k as f64 * x).sin(),
            TestFn::Cos(k) => (TAU * k as f64 * x).cos(),
        }
    }
}

impl std::fmt::Display for TestFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFn::One => write!(f, "1"),
            TestFn::Sin(k) => write!(f, "sin{k}"),
            TestFn::Cos(k) => write!(f, "cos{k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::eulerian_default().validate().unwrap();
        ExperimentConfig::intermediate_default().validate().unwrap();
    }

    #[test]
    fn rejects_unknown_mode_and_tiny_tori() {
        let mut c = ExperimentConfig::eulerian_default();
        c.scaling.mode = "lagrangian".into();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::eulerian_default();
        c.ns = vec![4];
        assert!(c.validate().is_err());
    }

    #[test]
    fn basis_has_odd_size() {
        assert_eq!(TestFn::basis(2).len(), 5);
        assert_eq!(TestFn::Cos(1).eval(0.0), 1.0);
    }
}
