//! Text descriptions of user-supplied models.
//!
//! ```toml
//! name = "pm1-copy"
//! [omega]
//! labels = ["-1", "0", "+1"]
//! eta = [0, 1, 0]
//! zeta = [-1, 0, 1]
//! involution = [2, 1, 0]
//! [measure]
//! pi = [0.3333333333333333, 0.3333333333333334, 0.3333333333333333]
//! [rates.r]
//! "-1,+1->+1,-1" = 2.0
//! [rates.s]
//! "0,+1->+1,0" = 1.0
//! [flux]
//! offset = [0.0, 1.0]
//! ```

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::ModelError;
use crate::model::SpinModel;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    #[serde(default = "default_name")]
    pub name: String,
    pub omega: OmegaSection,
    pub measure: MeasureSection,
    pub rates: RatesSection,
    #[serde(default)]
    pub flux: FluxSection,
}

fn default_name() -> String {
    "custom".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSection {
    pub labels: Vec<String>,
    pub eta: Vec<u32>,
    pub zeta: Vec<f64>,
    pub involution: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSection {
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    #[serde(default)]
    pub r: BTreeMap<String, f64>,
    #[serde(default)]
    pub s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    #[serde(default)]
    pub offset: Option<[f64; 2]>,
}

impl CustomModel {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        toml::from_str(text).map_err(|e| ModelError::InvalidSpec(e.to_string()))
    }

    pub fn build(&self) -> Result<SpinModel, ModelError> {
        let labels = &self.omega.labels;
        let k = labels.len();
        let lookup = |l: &str| {
            labels
                .iter()
                .position(|x| x == l.trim())
                .ok_or_else(|| ModelError::InvalidSpec(format!("unknown state label `{l}`")))
        };
        let fill = |table: &BTreeMap<String, f64>| -> Result<Vec<f64>, ModelError> {
            let mut out = vec![0.0; k.pow(4)];
            for (key, &rate) in table {
                let (from, to) = key
                    .split_once("->")
                    .ok_or_else(|| ModelError::InvalidSpec(format!("rate key `{key}` lacks `->`")))?;
                let pair = |s: &str| -> Result<(usize, usize), ModelError> {
                    let (a, b) = s
                        .split_once(',')
                        .ok_or_else(|| ModelError::InvalidSpec(format!("rate key `{key}` needs `a,b`")))?;
                    Ok((lookup(a)?, lookup(b)?))
                };
                let (a, b) = pair(from)?;
                let (c, d) = pair(to)?;
                out[((a * k + b) * k + c) * k + d] = rate;
            }
            Ok(out)
        };
        let r = fill(&self.rates.r)?;
        let s = fill(&self.rates.s)?;
        let offset = self.flux.offset.map_or((0.0, 0.0), |o| (o[0], o[1]));
        SpinModel::new(
            self.name.clone(),
            labels.clone(),
            self.omega.eta.clone(),
            self.omega.zeta.clone(),
            self.measure.pi.clone(),
            r,
            s,
            self.omega.involution.clone(),
            offset,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pm1;

    const PM1: &str = r#"
name = "pm1-copy"
[omega]
labels = ["-1", "0", "+1"]
eta = [0, 1, 0]
zeta = [-1, 0, 1]
involution = [2, 1, 0]
[measure]
pi = [0.3333333333333333, 0.3333333333333334, 0.3333333333333333]
[rates.r]
"-1,+1->+1,-1" = 2.0
"-1,0->0,-1" = 1.0
"0,+1->+1,0" = 1.0
[rates.s]
"-1,0->0,-1" = 1.0
"0,-1->-1,0" = 1.0
"-1,+1->+1,-1" = 1.0
"+1,-1->-1,+1" = 1.0
"0,+1->+1,0" = 1.0
"+1,0->0,+1" = 1.0
[flux]
offset = [0.0, 1.0]
"#;

    #[test]
    fn text_spec_reproduces_builtin() {
        let m = CustomModel::parse(PM1).unwrap().build().unwrap();
        let b = pm1();
        assert_eq!(m.r_rates, b.r_rates);
        assert_eq!(m.s_rates, b.s_rates);
        assert_eq!(m.flux_offset, b.flux_offset);
    }

    #[test]
    fn unknown_keys_and_labels_rejected() {
        assert!(CustomModel::parse(&format!("{PM1}\nextra = 1\n")).is_err());
        let bad = PM1.replace("\"-1,0->0,-1\" = 1.0\n\"0,+1", "\"-1,7->0,-1\" = 1.0\n\"0,+1");
        assert!(CustomModel::parse(&bad).unwrap().build().is_err());
    }
}
