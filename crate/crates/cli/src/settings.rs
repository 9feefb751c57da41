//! Resolved settings of every subcommand and the config-file layout.
//!
//! A config file holds optional top-level `seed`, `threads` and `out`, and one
//! table per subcommand named after it. Unknown keys anywhere are rejected.
//! Flags given on the command line override the file, which overrides the
//! defaults below.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::Table;
use twocons_harness::{ExperimentConfig, Profile};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Provenance block written by a previous run; ignored on input.
    pub manifest: Option<Table>,
    pub validate: Option<Table>,
    pub fluxes: Option<Table>,
    pub simulate: Option<Table>,
    #[serde(rename = "solve-pde")]
    pub solve_pde: Option<Table>,
    #[serde(rename = "build-entropy")]
    pub build_entropy: Option<Table>,
    #[serde(rename = "verify-bounds")]
    pub verify_bounds: Option<Table>,
    pub converge: Option<Table>,
    pub tails: Option<Table>,
    pub enumerate: Option<Table>,
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: ConfigFile =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        file.check_sections()?;
        Ok(file)
    }

    /// Every present section must parse as its settings type.
    fn check_sections(&self) -> Result<(), CliError> {
        fn check<S: DeserializeOwned + Serialize>(name: &str, t: &Option<Table>) -> Result<(), CliError> {
            match t {
                Some(t) => resolve::<S>(name, Some(t.clone()), Table::new()).map(|_| ()),
                None => Ok(()),
            }
        }
        check::<ValidateSettings>("validate", &self.validate)?;
        check::<FluxesSettings>("fluxes", &self.fluxes)?;
        check::<SimulateSettings>("simulate", &self.simulate)?;
        check::<SolvePdeSettings>("solve-pde", &self.solve_pde)?;
        check::<EntropySettings>("build-entropy", &self.build_entropy)?;
        check::<EntropySettings>("verify-bounds", &self.verify_bounds)?;
        check::<TailsSettings>("tails", &self.tails)?;
        check::<EnumerateSettings>("enumerate", &self.enumerate)?;
        if let Some(t) = &self.converge {
            converge_settings(Some(t.clone()), None)?;
        }
        Ok(())
    }

    pub fn section(&self, command: &str) -> Option<Table> {
        match command {
            "validate" => self.validate.clone(),
            "fluxes" => self.fluxes.clone(),
            "simulate" => self.simulate.clone(),
            "solve-pde" => self.solve_pde.clone(),
            "build-entropy" => self.build_entropy.clone(),
            "verify-bounds" => self.verify_bounds.clone(),
            "converge" => self.converge.clone(),
            "tails" => self.tails.clone(),
            "enumerate" => self.enumerate.clone(),
            _ => None,
        }
    }
}

/// Defaults, then the file section, then the flags.
pub fn resolve<S: DeserializeOwned + Serialize>(name: &str, file: Option<Table>, flags: Table) -> Result<S, CliError> {
    let mut table = file.unwrap_or_default();
    table.extend(flags);
    table.try_into().map_err(|e| CliError::Usage(format!("[{name}]: {e}")))
}

/// Non-`None` fields of a flag struct as a table.
pub fn flag_table<T: Serialize>(flags: &T) -> Table {
    Table::try_from(flags).expect("flag structs serialize to tables")
}

fn profile(mean: f64, sin_amp: f64, cos_amp: f64) -> Profile {
    Profile { mean, sin_amp, cos_amp }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSettings {
    pub model: String,
    pub block_len: usize,
}

impl Default for ValidateSettings {
    fn default() -> Self {
        Self { model: "pm1".into(), block_len: 4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluxesSettings {
    pub model: String,
    /// Points per axis of the interior grid.
    pub grid: usize,
}

impl Default for FluxesSettings {
    fn default() -> Self {
        Self { model: "pm1".into(), grid: 20 }
    }
}

/// Fields of the initial profiles `mean + sin sin(2 pi x) + cos cos(2 pi x)`,
/// repeated in each settings type because flattened structs cannot reject
/// unknown keys.
macro_rules! profiles {
    ($t:ty) => {
        impl $t {
            pub fn rho(&self) -> Profile {
                profile(self.rho_mean, self.rho_sin, self.rho_cos)
            }

            pub fn u(&self) -> Profile {
                profile(self.u_mean, self.u_sin, self.u_cos)
            }
        }
    };
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSettings {
    pub model: String,
    pub n: usize,
    /// `eulerian` or `intermediate`.
    pub mode: String,
    pub beta: f64,
    pub delta: f64,
    /// Block length; the plan default when absent.
    pub block_len: Option<usize>,
    pub t_end: f64,
    /// Equally spaced snapshots in `(0, t_end]`, plus `t = 0`.
    pub snapshots: usize,
    pub field_points: usize,
    /// First replica index.
    pub replica: u64,
    /// Replicas `replica..replica + replicas`; fields are averaged over them.
    pub replicas: usize,
    pub rho_mean: f64,
    pub rho_sin: f64,
    pub rho_cos: f64,
    pub u_mean: f64,
    pub u_sin: f64,
    pub u_cos: f64,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        Self {
            model: "pm1".into(),
            n: 1024,
            mode: "eulerian".into(),
            beta: 0.0,
            delta: 0.0,
            block_len: None,
            t_end: 0.2,
            snapshots: 4,
            field_points: 128,
            replica: 0,
            replicas: 1,
            rho_mean: 0.5,
            rho_sin: 0.1,
            rho_cos: 0.0,
            u_mean: 0.0,
            u_sin: 0.0,
            u_cos: 0.1,
        }
    }
}

profiles!(SimulateSettings);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolvePdeSettings {
    /// Limit system with this `gamma`; otherwise the fluxes of `model`.
    pub gamma: Option<f64>,
    pub model: Option<String>,
    pub m: usize,
    pub t_end: f64,
    /// `muscl` or `central4`.
    pub scheme: String,
    pub snapshots: usize,
    pub rho_mean: f64,
    pub rho_sin: f64,
    pub rho_cos: f64,
    pub u_mean: f64,
    pub u_sin: f64,
    pub u_cos: f64,
}

impl Default for SolvePdeSettings {
    fn default() -> Self {
        Self {
            gamma: None,
            model: None,
            m: 512,
            t_end: 0.2,
            scheme: "muscl".into(),
            snapshots: 4,
            rho_mean: 0.5,
            rho_sin: 0.1,
            rho_cos: 0.0,
            u_mean: 0.0,
            u_sin: 0.0,
            u_cos: 0.1,
        }
    }
}

profiles!(SolvePdeSettings);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropySettings {
    pub gamma: f64,
    pub r_lo: f64,
    /// Defaults to `r_lo * e^4`.
    pub r_hi: Option<f64>,
    pub cells: usize,
    /// Build for the rescaled two-lane family at this `n` instead of the limit.
    pub n: Option<f64>,
    pub beta: f64,
}

impl Default for EntropySettings {
    fn default() -> Self {
        Self { gamma: 2.0, r_lo: 0.15, r_hi: None, cells: 96, n: None, beta: 0.1 }
    }
}

impl EntropySettings {
    pub fn r_hi(&self) -> f64 {
        self.r_hi.unwrap_or(self.r_lo * 4f64.exp())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailsSettings {
    pub model: String,
    pub n: usize,
    pub beta: f64,
    pub delta: f64,
    pub block_len: usize,
    /// Macroscopic constant profile.
    pub rho: f64,
    pub u: f64,
    pub training: usize,
    pub test: usize,
    pub levels: usize,
    pub min_exceedances: usize,
}

impl Default for TailsSettings {
    fn default() -> Self {
        let t = twocons_harness::TailSettings::default();
        Self {
            model: "pm1".into(),
            n: 10_000,
            beta: 0.1,
            delta: 0.1,
            block_len: 316,
            rho: 0.5,
            u: 0.1,
            training: t.training,
            test: t.test,
            levels: t.levels,
            min_exceedances: t.min_exceedances,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnumerateSettings {
    pub model: String,
    pub block_lens: Vec<usize>,
}

impl Default for EnumerateSettings {
    fn default() -> Self {
        Self { model: "pm1".into(), block_lens: vec![4, 5, 6, 7, 8] }
    }
}

/// The converge section is a full experiment; absent keys come from the
/// preset, and a present nested table replaces the preset's.
pub fn converge_settings(file: Option<Table>, preset: Option<&str>) -> Result<ExperimentConfig, CliError> {
    let preset = match preset.unwrap_or("eulerian") {
        "eulerian" => ExperimentConfig::eulerian_default(),
        "intermediate" => ExperimentConfig::intermediate_default(),
        p => return Err(CliError::Usage(format!("unknown preset `{p}` (eulerian, intermediate)"))),
    };
    let base = Table::try_from(&preset).expect("experiment configs serialize");
    let cfg: ExperimentConfig = resolve("converge", Some(base), file.unwrap_or_default())?;
    cfg.validate().map_err(|e| CliError::Usage(format!("[converge]: {e}")))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: Table = toml::from_str("model = \"two-lane\"\nblock_len = 5").unwrap();
        let flags: Table = toml::from_str("block_len = 6").unwrap();
        let s: ValidateSettings = resolve("validate", Some(file), flags).unwrap();
        assert_eq!((s.model.as_str(), s.block_len), ("two-lane", 6));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let file: Table = toml::from_str("blocklen = 5").unwrap();
        assert!(resolve::<ValidateSettings>("validate", Some(file), Table::new()).is_err());
        assert!(toml::from_str::<ConfigFile>("[simulat]\nn = 3").is_err());
        let bad = ConfigFile { simulate: Some(toml::from_str("rho_amp = 0.1").unwrap()), ..Default::default() };
        assert!(bad.check_sections().is_err());
    }

    #[test]
    fn converge_preset_round_trips() {
        let cfg = converge_settings(None, Some("intermediate")).unwrap();
        assert_eq!(cfg, ExperimentConfig::intermediate_default());
        let over: Table = toml::from_str("replicas = 4\nns = [64, 128]").unwrap();
        let cfg = converge_settings(Some(over), None).unwrap();
        assert_eq!((cfg.replicas, cfg.ns.clone()), (4, vec![64, 128]));
    }

    #[test]
    fn shipped_configs_match_the_presets() {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
        for preset in ["eulerian", "intermediate"] {
            let file = ConfigFile::load(&std::path::Path::new(root).join(format!("{preset}.toml"))).unwrap();
            let cfg = converge_settings(file.section("converge"), None).unwrap();
            assert_eq!(cfg, converge_settings(None, Some(preset)).unwrap(), "{preset}");
        }
    }
}
