//! Scenario configuration: flat key-value TOML with one section of scenario
//! metadata and one of numeric parameters. Unknown keys are hard errors.

use crate::error::{HsError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// All tunable numbers, optional; each scenario resolves its own defaults
/// and echoes the resolved values into the run manifest.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n: Option<u32>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    /// Weight exponent of the perturbed problem.
    pub s: Option<f64>,
    /// Subcritical power of the perturbed problem.
    pub p: Option<f64>,
    pub r_max: Option<f64>,
    pub grid_n: Option<usize>,
    pub gamma: Option<f64>,
    pub eps_start: Option<f64>,
    pub eps_floor: Option<f64>,
    pub eps_steps: Option<usize>,
    pub cap_radius: Option<f64>,
    pub chart_radius: Option<f64>,
    pub quad_n: Option<usize>,
    pub mu_list: Option<Vec<f64>>,
    pub bubble_z: Option<f64>,
    pub bubble_cutoff: Option<f64>,
    pub bookkeeping_mu: Option<f64>,
    pub tol_grad: Option<f64>,
    pub max_iter: Option<usize>,
    pub inits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    CurvedExistence,
    HalfSpace,
    NonexistenceProbe,
    Perturbed,
    OracleCertify,
    IdentitiesSuite,
}

impl Scenario {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "thm11-curved-existence" => Ok(Scenario::CurvedExistence),
            "thm12-halfspace" => Ok(Scenario::HalfSpace),
            "thm13-nonexistence-probe" => Ok(Scenario::NonexistenceProbe),
            "thm51-perturbed" => Ok(Scenario::Perturbed),
            "oracle-certify" => Ok(Scenario::OracleCertify),
            "identities-suite" => Ok(Scenario::IdentitiesSuite),
            other => Err(HsError::Config(format!(
                "unknown scenario '{other}'; expected one of thm11-curved-existence, \
                 thm12-halfspace, thm13-nonexistence-probe, thm51-perturbed, \
                 oracle-certify, identities-suite"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::CurvedExistence => "thm11-curved-existence",
            Scenario::HalfSpace => "thm12-halfspace",
            Scenario::NonexistenceProbe => "thm13-nonexistence-probe",
            Scenario::Perturbed => "thm51-perturbed",
            Scenario::OracleCertify => "oracle-certify",
            Scenario::IdentitiesSuite => "identities-suite",
        }
    }
}

pub fn parse_config(text: &str) -> Result<Config> {
    toml::from_str(text).map_err(|e| HsError::Config(format!("config parse error: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config(
            "[scenario]\nname = \"thm12-halfspace\"\nseed = 7\n\n[params]\nn = 3\nlambda = -1.0\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario.name, "thm12-halfspace");
        assert_eq!(cfg.scenario.seed, 7);
        assert_eq!(cfg.params.n, Some(3));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = "[scenario]\nname = \"thm12-halfspace\"\n\n[params]\nlambda_typo = 1.0\n";
        assert!(parse_config(bad).is_err());
        let bad2 = "[scenario]\nname = \"x\"\nfoo = 1\n";
        assert!(parse_config(bad2).is_err());
    }

    #[test]
    fn scenario_names_roundtrip() {
        for name in [
            "thm11-curved-existence",
            "thm12-halfspace",
            "thm13-nonexistence-probe",
            "thm51-perturbed",
            "oracle-certify",
            "identities-suite",
        ] {
            assert_eq!(Scenario::from_name(name).unwrap().name(), name);
        }
        assert!(Scenario::from_name("nope").is_err());
    }
}
