//! Single-site state spaces with conserved quantities and bond rate tables.

use crate::error::ModelError;
use crate::spec::CustomModel;

/// Tolerance used when validating that `pi_ref` is a probability vector.
const MEASURE_TOL: f64 = 1e-12;

/// A finite spin model: site states, conserved maps, reference measure and
/// the asymmetric (`r`) and symmetric (`s`) nearest-neighbour rate tensors.
///
/// Rates are stored flat, indexed by [`SpinModel::idx`]`(a, b, c, d)` for the
/// transition `(a, b) -> (c, d)` of an ordered bond `(j, j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinModel {
    pub name: String,
    pub labels: Vec<String>,
    /// Particle number per site state.
    pub eta: Vec<u32>,
    /// Slope per site state before the `v0` rescaling, in `Z/2`.
    pub zeta_raw: Vec<f64>,
    /// Scale making `Var(zeta | eta = 0) = 1`.
    pub v0: f64,
    pub pi_ref: Vec<f64>,
    pub r_rates: Vec<f64>,
    pub s_rates: Vec<f64>,
    pub involution: Vec<usize>,
    /// Constant added to the macroscopic fluxes `(Psi, Phi)`.
    ///
    /// Microscopic currents are defined only up to an additive constant (a
    /// constant current has zero divergence), so a model may declare the gauge
    /// in which its fluxes vanish at the origin.
    pub flux_offset: (f64, f64),
}

impl SpinModel {
    /// Validates the tables and fixes `v0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        eta: Vec<u32>,
        zeta_raw: Vec<f64>,
        pi_ref: Vec<f64>,
        r_rates: Vec<f64>,
        s_rates: Vec<f64>,
        involution: Vec<usize>,
        flux_offset: (f64, f64),
    ) -> Result<Self, ModelError> {
        let k = labels.len();
        if k < 2 {
            return Err(ModelError::InvalidSpec("need at least two site states".into()));
        }
        if eta.len() != k || zeta_raw.len() != k || pi_ref.len() != k || involution.len() != k {
            return Err(ModelError::InvalidSpec("table lengths differ from |Omega|".into()));
        }
        if r_rates.len() != k.pow(4) || s_rates.len() != k.pow(4) {
            return Err(ModelError::InvalidRates(format!("rate tensors must have {} entries", k.pow(4))));
        }
        for (i, z) in zeta_raw.iter().enumerate() {
            if !z.is_finite() || (2.0 * z - (2.0 * z).round()).abs() > 1e-12 {
                return Err(ModelError::InvalidSpec(format!("zeta of state {i} is not a half-integer")));
            }
        }
        if pi_ref.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(ModelError::InvalidMeasure("entries must be positive".into()));
        }
        let total: f64 = pi_ref.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(ModelError::InvalidMeasure(format!("sums to {total}")));
        }
        for (w, &rw) in involution.iter().enumerate() {
            if rw >= k || involution[rw] != w {
                return Err(ModelError::BrokenInvolution(format!("R(R({w})) != {w}")));
            }
            if eta[rw] != eta[w] || zeta_raw[rw] != -zeta_raw[w] {
                return Err(ModelError::BrokenInvolution(format!(
                    "state {w}: need eta(Rw)=eta(w) and zeta(Rw)=-zeta(w)"
                )));
            }
            if (pi_ref[rw] - pi_ref[w]).abs() > MEASURE_TOL {
                return Err(ModelError::InvalidMeasure(format!("pi(R{w}) != pi({w})")));
            }
        }
        for (name, t) in [("r", &r_rates), ("s", &s_rates)] {
            if t.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(ModelError::InvalidRates(format!("{name} has negative or non-finite entries")));
            }
        }
        // Conditional law of zeta given an empty site.
        let p0: f64 = (0..k).filter(|&w| eta[w] == 0).map(|w| pi_ref[w]).sum();
        if p0 <= 0.0 {
            return Err(ModelError::InvalidSpec("no state with eta = 0".into()));
        }
        let var0: f64 = (0..k)
            .filter(|&w| eta[w] == 0)
            .map(|w| pi_ref[w] * zeta_raw[w] * zeta_raw[w])
            .sum::<f64>()
            / p0;
        let pzero0: f64 =
            (0..k).filter(|&w| eta[w] == 0 && zeta_raw[w] == 0.0).map(|w| pi_ref[w]).sum::<f64>() / p0;
        if pzero0 >= 1.0 || var0 <= 0.0 {
            return Err(ModelError::InvalidSpec("zeta is degenerate on empty sites".into()));
        }
        let v0 = 1.0 / var0.sqrt();
        Ok(Self {
            name: name.into(),
            labels,
            eta,
            zeta_raw,
            v0,
            pi_ref,
            r_rates,
            s_rates,
            involution,
            flux_offset,
        })
    }

    /// Number of site states.
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Flat index of the transition `(a, b) -> (c, d)`.
    #[inline]
    pub fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        let k = self.size();
        ((a * k + b) * k + c) * k + d
    }

    #[inline]
    pub fn r(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.r_rates[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn s(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.s_rates[self.idx(a, b, c, d)]
    }

    /// Rescaled slope `v0 * zeta_raw`.
    #[inline]
    pub fn zeta(&self, w: usize) -> f64 {
        self.v0 * self.zeta_raw[w]
    }

    /// Particle number as a float.
    #[inline]
    pub fn eta_f(&self, w: usize) -> f64 {
        f64::from(self.eta[w])
    }

    /// Twice the raw slope, an exact integer used for conservation bookkeeping.
    #[inline]
    pub fn zeta_half_units(&self, w: usize) -> i64 {
        (2.0 * self.zeta_raw[w]).round() as i64
    }

    /// Index of a state by label.
    pub fn state(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Returns a copy with one asymmetric rate replaced (used for negative controls).
    pub fn with_r(&self, a: usize, b: usize, c: usize, d: usize, rate: f64) -> Self {
        let mut m = self.clone();
        let i = m.idx(a, b, c, d);
        m.r_rates[i] = rate;
        m
    }
}

/// Model selector accepted by [`build_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// The `{-1, 0, +1}` model.
    Pm1,
    /// Two-lane model with one particle and slope `+-1/2` per site.
    TwoLane { gamma: f64 },
    Custom(CustomModel),
}

impl std::str::FromStr for ModelSpec {
    type Err = ModelError;

    /// Parses `pm1`, `pm1-model`, `two-lane` (gamma 2) or `two-lane:<gamma>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "pm1" | "pm1-model" => return Ok(Self::Pm1),
            "two-lane" => return Ok(Self::TwoLane { gamma: 2.0 }),
            _ => {}
        }
        if let Some(g) = s.strip_prefix("two-lane:") {
            let gamma: f64 =
                g.parse().map_err(|_| ModelError::InvalidSpec(format!("bad gamma `{g}`")))?;
            return Ok(Self::TwoLane { gamma });
        }
        Err(ModelError::UnknownModel(s.to_string()))
    }
}

/// Builds a model from its description and checks the type invariants.
pub fn build_model(spec: &ModelSpec) -> Result<SpinModel, ModelError> {
    match spec {
        ModelSpec::Pm1 => Ok(pm1()),
        ModelSpec::TwoLane { gamma } => two_lane(*gamma),
        ModelSpec::Custom(c) => c.build(),
    }
}

/// The `{-1, 0, +1}` model: `eta = 1 - |w|`, `zeta = w`.
pub fn pm1() -> SpinModel {
    let labels: Vec<String> = ["-1", "0", "+1"].iter().map(|s| s.to_string()).collect();
    let k: usize = 3;
    let mut r = vec![0.0; k.pow(4)];
    let mut s = vec![0.0; k.pow(4)];
    let at = |a: usize, b: usize, c: usize, d: usize| ((a * k + b) * k + c) * k + d;
    let (m, z, p) = (0, 1, 2);
    r[at(m, p, p, m)] = 2.0;
    r[at(m, z, z, m)] = 1.0;
    r[at(z, p, p, z)] = 1.0;
    for a in 0..k {
        for b in 0..k {
            if a != b {
                s[at(a, b, b, a)] = 1.0;
            }
        }
    }
    SpinModel::new(
        "pm1",
        labels,
        vec![0, 1, 0],
        vec![-1.0, 0.0, 1.0],
        vec![1.0 / 3.0; 3],
        r,
        s,
        vec![2, 1, 0],
        (0.0, 1.0),
    )
    .expect("built-in pm1 tables are valid")
}

/// Two-lane model with states `(eta, sign)`, `eta in {0,1}`, slope `+-1/2`.
///
/// Particles hop between neighbouring sites with rates biased by the local
/// slopes; slope units swap with rates biased by the local occupations. The
/// bias of the swap rates is tuned so that `Phi = (rho - gamma)(1 - u^2)`.
pub fn two_lane(gamma: f64) -> Result<SpinModel, ModelError> {
    if !gamma.is_finite() {
        return Err(ModelError::InvalidSpec("gamma must be finite".into()));
    }
    let labels: Vec<String> = ["0-", "0+", "1-", "1+"].iter().map(|s| s.to_string()).collect();
    let k: usize = 4;
    let state = |e: usize, plus: bool| 2 * e + usize::from(plus);
    let sign = |plus: bool| if plus { 1.0 } else { -1.0 };
    let at = |a: usize, b: usize, c: usize, d: usize| ((a * k + b) * k + c) * k + d;
    let mut r = vec![0.0; k.pow(4)];
    let mut s = vec![0.0; k.pow(4)];
    let c0 = 1.5 + gamma.abs();
    let bias = |e1: usize, e2: usize| (e1 + e2) as f64 - 2.0 * gamma;
    for pa in [false, true] {
        for pb in [false, true] {
            let drift = (sign(pa) + sign(pb)) / 4.0;
            r[at(state(1, pa), state(0, pb), state(0, pa), state(1, pb))] = 1.0 + drift;
            r[at(state(0, pa), state(1, pb), state(1, pa), state(0, pb))] = 1.0 - drift;
            s[at(state(1, pa), state(0, pb), state(0, pa), state(1, pb))] = 1.0;
            s[at(state(0, pa), state(1, pb), state(1, pa), state(0, pb))] = 1.0;
        }
    }
    for e1 in 0..2 {
        for e2 in 0..2 {
            let d = bias(e1, e2);
            r[at(state(e1, true), state(e2, false), state(e1, false), state(e2, true))] = c0 + d / 2.0;
            r[at(state(e1, false), state(e2, true), state(e1, true), state(e2, false))] = c0 - d / 2.0;
            s[at(state(e1, true), state(e2, false), state(e1, false), state(e2, true))] = 1.0;
            s[at(state(e1, false), state(e2, true), state(e1, true), state(e2, false))] = 1.0;
        }
    }
    SpinModel::new(
        format!("two-lane:{gamma}"),
        labels,
        vec![0, 0, 1, 1],
        vec![-0.5, 0.5, -0.5, 0.5],
        vec![0.25; 4],
        r,
        s,
        vec![1, 0, 3, 2],
        (0.0, 0.0),
    )
}
