//! Scenario-driven experiment runner: parses a config, executes the named
//! scenario, and writes a manifest plus per-scenario CSV/JSON artifacts.
//! Identical config and seed give byte-identical outputs.

pub mod config;
pub mod report;
pub mod scenarios;

use crate::error::{HsError, Result};
use config::{parse_config, Config, Scenario};
use report::write_json;
use scenarios::{Check, RunOutput};
use serde_json::json;
use std::path::{Path, PathBuf};

pub struct RunSummary {
    pub scenario: &'static str,
    pub out_dir: PathBuf,
    pub checks: Vec<Check>,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HsError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Execute the scenario named in the config. Returns the check list; the
/// caller maps failed checks to exit status 2.
pub fn run(
    cfg: &Config,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
    plots: bool,
) -> Result<RunSummary> {
    let scenario = Scenario::from_name(&cfg.scenario.name)?;
    let seed = seed_override.unwrap_or(cfg.scenario.seed);
    let out_dir: PathBuf = match (out_override, &cfg.scenario.out_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from(format!("runs/{}", scenario.name())),
    };
    std::fs::create_dir_all(&out_dir)?;
    let output = dispatch(scenario, cfg, &out_dir, seed, plots)?;
    write_manifest(scenario, seed, &out_dir, &output)?;
    Ok(RunSummary { scenario: scenario.name(), out_dir, checks: output.checks })
}

fn dispatch(
    scenario: Scenario,
    cfg: &Config,
    out: &Path,
    seed: u64,
    plots: bool,
) -> Result<RunOutput> {
    match scenario {
        Scenario::OracleCertify => scenarios::run_oracle_certify(out, seed, plots),
        Scenario::IdentitiesSuite => scenarios::run_identities_suite(out, seed, plots),
        Scenario::HalfSpace => scenarios::run_halfspace(&cfg.params, out, seed, plots),
        Scenario::CurvedExistence => scenarios::run_curved_existence(&cfg.params, out, seed, plots),
        Scenario::NonexistenceProbe => {
            scenarios::run_nonexistence_probe(&cfg.params, out, seed, plots)
        }
        Scenario::Perturbed => scenarios::run_perturbed(&cfg.params, out, seed, plots),
    }
}

fn write_manifest(scenario: Scenario, seed: u64, out: &Path, output: &RunOutput) -> Result<()> {
    let checks: Vec<serde_json::Value> = output
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail}))
        .collect();
    write_json(
        &out.join("manifest.json"),
        &json!({
            "scenario": scenario.name(),
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": output.resolved,
            "files": output.files,
            "checks": checks,
        }),
    )
}

/// Dry-run parameter validation: report the theorem regime, never fail.
pub fn validate(cfg: &Config) -> Result<String> {
    let scenario = Scenario::from_name(&cfg.scenario.name)?;
    let mut lines = vec![format!("scenario: {}", scenario.name())];
    lines.extend(scenarios::classify_regime(&cfg.params));
    Ok(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::parse_config;

    #[test]
    fn identities_suite_runs_and_passes() {
        let cfg = parse_config("[scenario]\nname = \"identities-suite\"\nseed = 11\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&cfg, Some(dir.path()), None, false).unwrap();
        assert!(summary.all_passed(), "checks: {:?}", summary.checks);
        assert!(dir.path().join("identities.csv").exists());
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn determinism_byte_identical() {
        let cfg = parse_config("[scenario]\nname = \"identities-suite\"\nseed = 4\n").unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(&cfg, Some(d1.path()), None, false).unwrap();
        run(&cfg, Some(d2.path()), None, false).unwrap();
        for f in ["identities.csv", "manifest.json"] {
            let a = std::fs::read(d1.path().join(f)).unwrap();
            let b = std::fs::read(d2.path().join(f)).unwrap();
            assert_eq!(a, b, "{f} must be byte-identical");
        }
    }

    #[test]
    fn validate_reports_regime() {
        let cfg = parse_config(
            "[scenario]\nname = \"thm12-halfspace\"\n\n[params]\nn = 3\ns1 = 1.0\ns2 = 0.5\nlambda = -2.0\n",
        )
        .unwrap();
        let report = validate(&cfg).unwrap();
        assert!(report.contains("existence regime"), "{report}");
    }
}
