//! Macroscopic fluxes by exact summation against product canonical measures.

use std::io::Write;
use std::sync::Arc;

use crate::conditions::{bond_currents, validate_conditions};
use crate::domain::Domain;
use crate::error::{ModelError, NumericError};
use crate::measure::{model_domain, moments, site_law};
use crate::model::SpinModel;
use crate::numdiff::{d1, d2, extrapolate_to_zero, STEP};

/// First partial derivatives of both fluxes plus `Phi_uu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPartials {
    pub psi_rho: f64,
    pub psi_u: f64,
    pub phi_rho: f64,
    pub phi_u: f64,
    pub phi_uu: f64,
}

/// Diagnostics emitted while building a [`FluxPair`].
#[derive(Debug, Clone, PartialEq)]
pub enum FluxWarning {
    /// `|Psi_{rho u}(0,0) - 1|` exceeds `1e-6`; time should be rescaled.
    Normalization { psi_rho_u: f64, phi_rho: f64 },
}

/// `Psi(rho, u) = E psi`, `Phi(rho, u) = E phi` under `pi_{rho,u} x pi_{rho,u}`.
#[derive(Debug, Clone)]
pub struct FluxPair {
    model: Arc<SpinModel>,
    domain: Domain,
    psi_tab: Vec<f64>,
    phi_tab: Vec<f64>,
    psis_tab: Vec<f64>,
    phis_tab: Vec<f64>,
    gamma: f64,
    psi_rho_u0: f64,
    phi_rho0: f64,
    pub warnings: Vec<FluxWarning>,
}

/// Builds the flux pair after checking conditions (A), (C), (D), (E).
pub fn macroscopic_flux(model: &SpinModel) -> Result<FluxPair, ModelError> {
    let rep = validate_conditions(model, 2);
    let ok = rep.conservation.pass
        && rep.lr_symmetry.pass
        && rep.asym_stationarity.pass
        && rep.sym_reversibility.pass;
    if !ok {
        return Err(ModelError::ConditionsFailed(rep.to_string()));
    }
    Ok(FluxPair::unchecked(model))
}

impl FluxPair {
    /// Builds the flux pair without checking the structural conditions.
    pub fn unchecked(model: &SpinModel) -> Self {
        let (psi_tab, phi_tab) = bond_currents(model, &model.r_rates);
        let (psis_tab, phis_tab) = bond_currents(model, &model.s_rates);
        let mut fp = Self {
            model: Arc::new(model.clone()),
            domain: model_domain(model),
            psi_tab,
            phi_tab,
            psis_tab,
            phis_tab,
            gamma: f64::NAN,
            psi_rho_u0: f64::NAN,
            phi_rho0: f64::NAN,
            warnings: Vec::new(),
        };
        let (gamma, prho_u, phi_rho) = fp.corner_constants(0.1);
        fp.gamma = gamma;
        fp.psi_rho_u0 = prho_u;
        fp.phi_rho0 = phi_rho;
        if (prho_u - 1.0).abs() > 1e-6 || (phi_rho - 1.0).abs() > 1e-6 {
            fp.warnings.push(FluxWarning::Normalization { psi_rho_u: prho_u, phi_rho });
        }
        fp
    }

    pub fn model(&self) -> &SpinModel {
        &self.model
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `gamma = Phi_uu(0, 0) / 2`, extrapolated to the corner.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `Psi_{rho u}(0, 0)`, extrapolated to the corner.
    pub fn psi_rho_u_origin(&self) -> f64 {
        self.psi_rho_u0
    }

    /// `Phi_rho(0, 0)`, extrapolated to the corner.
    pub fn phi_rho_origin(&self) -> f64 {
        self.phi_rho0
    }

    fn pair_mean(tab: &[f64], p: &[f64]) -> f64 {
        let k = p.len();
        let mut acc = 0.0;
        for a in 0..k {
            for b in 0..k {
                acc += p[a] * p[b] * tab[a * k + b];
            }
        }
        acc
    }

    /// Both fluxes, including the model's gauge offset.
    pub fn psi_phi(&self, rho: f64, u: f64) -> Result<(f64, f64), NumericError> {
        let p = site_law(&self.model, rho, u)?;
        let (o1, o2) = self.model.flux_offset;
        Ok((Self::pair_mean(&self.psi_tab, &p) + o1, Self::pair_mean(&self.phi_tab, &p) + o2))
    }

    pub fn psi(&self, rho: f64, u: f64) -> Result<f64, NumericError> {
        Ok(self.psi_phi(rho, u)?.0)
    }

    pub fn phi(&self, rho: f64, u: f64) -> Result<f64, NumericError> {
        Ok(self.psi_phi(rho, u)?.1)
    }

    /// Expectations of the symmetric currents (zero for valid models).
    pub fn symmetric_means(&self, rho: f64, u: f64) -> Result<(f64, f64), NumericError> {
        let p = site_law(&self.model, rho, u)?;
        Ok((Self::pair_mean(&self.psis_tab, &p), Self::pair_mean(&self.phis_tab, &p)))
    }

    fn component(&self, which: usize) -> impl Fn(f64, f64) -> Option<f64> + '_ {
        move |r, u| self.psi_phi(r, u).ok().map(|v| if which == 0 { v.0 } else { v.1 })
    }

    /// First partials and `Phi_uu` by Richardson-extrapolated differences.
    pub fn partials(&self, rho: f64, u: f64) -> Result<FluxPartials, NumericError> {
        if !self.domain.contains_interior(rho, u) {
            return Err(NumericError::OutOfDomain { rho, u });
        }
        let oob = NumericError::OutOfDomain { rho, u };
        let psi = self.component(0);
        let phi = self.component(1);
        let psi_rho = d1(&|x| psi(x, u), rho, STEP).ok_or(oob.clone())?;
        let psi_u = d1(&|y| psi(rho, y), u, STEP).ok_or(oob.clone())?;
        let phi_rho = d1(&|x| phi(x, u), rho, STEP).ok_or(oob.clone())?;
        let phi_u = d1(&|y| phi(rho, y), u, STEP).ok_or(oob.clone())?;
        let phi_uu = d2(&|y| phi(rho, y), u, STEP).ok_or(oob)?;
        Ok(FluxPartials { psi_rho, psi_u, phi_rho, phi_u, phi_uu })
    }

    /// Corner constants `(gamma, Psi_{rho u}(0,0), Phi_rho(0,0))` from samples
    /// along `rho = eps^2`, `u = 0` with `eps = e0, e0/2, e0/4`.
    pub fn corner_constants(&self, e0: f64) -> (f64, f64, f64) {
        let eps = [e0, e0 / 2.0, e0 / 4.0];
        let rhos = eps.map(|e| e * e);
        let phi = self.component(1);
        let psi = self.component(0);
        let h = STEP.min(rhos[2] / 4.0).max(1e-5);
        let phi_uu = rhos.map(|r| d2(&|y| phi(r, y), 0.0, STEP).unwrap_or(f64::NAN));
        let psi_ru = rhos.map(|r| {
            let g = |x: f64| d1(&|y| psi(x, y), 0.0, STEP);
            d1(&g, r, h).unwrap_or(f64::NAN)
        });
        let phi_r = rhos.map(|r| d1(&|x| phi(x, 0.0), r, h).unwrap_or(f64::NAN));
        (
            0.5 * extrapolate_to_zero(rhos, phi_uu),
            extrapolate_to_zero(rhos, psi_ru),
            extrapolate_to_zero(rhos, phi_r),
        )
    }

    /// Writes `rho,u,Psi,Phi,Psi_rho,Psi_u,Phi_rho,Phi_u` on a grid; points
    /// outside the interior are skipped.
    pub fn write_csv<W: Write>(&self, out: W, rhos: &[f64], us: &[f64]) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(out);
        writeln!(out, "rho,u,Psi,Phi,Psi_rho,Psi_u,Phi_rho,Phi_u")?;
        for &r in rhos {
            for &u in us {
                if let (Ok((a, b)), Ok(p)) = (self.psi_phi(r, u), self.partials(r, u)) {
                    writeln!(out, "{r},{u},{a},{b},{},{},{},{}", p.psi_rho, p.psi_u, p.phi_rho, p.phi_u)?;
                }
            }
        }
        out.flush()
    }
}

/// Onsager defect `|Psi_u Var(zeta) - Phi_u Cov - Phi_rho Var(eta) + Psi_rho Cov|`.
pub fn onsager_residual(model: &SpinModel, rho: f64, u: f64) -> Result<f64, NumericError> {
    let fp = FluxPair::unchecked(model);
    onsager_residual_with(&fp, rho, u)
}

/// As [`onsager_residual`], reusing an existing flux pair.
pub fn onsager_residual_with(fp: &FluxPair, rho: f64, u: f64) -> Result<f64, NumericError> {
    let d = fp.partials(rho, u)?;
    let p = site_law(fp.model(), rho, u)?;
    let m = moments(fp.model(), &p);
    Ok((d.psi_u * m.var_zeta - d.phi_u * m.cov - d.phi_rho * m.var_eta + d.psi_rho * m.cov).abs())
}
