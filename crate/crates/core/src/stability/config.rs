//! Declarative description of a stability run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::shift::ShiftOptions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySpec {
    /// Polytropic exponent; ignored when `casimir` is given.
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(rename = "M")]
    pub mass: f64,
    /// Full Casimir description (`{"kind": "two-power", ...}`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub casimir: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

fn default_dt_tdyn() -> f64 {
    1.0 / 200.0
}

fn default_method() -> String {
    "direct".into()
}

fn default_theta() -> f64 {
    0.5
}

fn default_scheme() -> String {
    "leapfrog".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    /// Time step in units of the dynamical time.
    #[serde(default = "default_dt_tdyn")]
    pub dt_tdyn: f64,
    /// Absolute time step; overrides `dt_tdyn`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Plummer softening; defaults to `0.02 R (10⁴/N)^{1/3}`.
    #[serde(default)]
    pub softening: Option<f64>,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            dt_tdyn: default_dt_tdyn(),
            dt: None,
            softening: None,
            method: default_method(),
            theta: default_theta(),
            scheme: default_scheme(),
        }
    }
}

fn default_sampler() -> String {
    "quasi-random".into()
}

fn default_radii() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0]
}

/// Estimator of the particle self-interaction entering the field distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldEstimate {
    /// Softening extrapolated to zero, self-pairs compensated.
    #[default]
    Continuum,
    /// The softened pair sum of the dynamics.
    Softened,
}

fn default_log_level() -> String {
    "info".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub steady: SteadySpec,
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub horizon_tdyn: f64,
    pub cadence_tdyn: f64,
    #[serde(default)]
    pub shift: ShiftOptions,
    #[serde(default)]
    pub field_estimate: FieldEstimate,
    #[serde(default = "default_sampler")]
    pub sampler: String,
    /// Concentration radii in units of the support radius.
    #[serde(default = "default_radii")]
    pub concentration_radii: Vec<f64>,
    /// Write particle snapshots at every record (the first and last are always written).
    #[serde(default)]
    pub snapshot_every_record: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_log_level")]
    pub log_level: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Lists every out-of-range field.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        match (&self.steady.casimir, self.steady.k) {
            (None, None) => check(false, "steady.k: required unless steady.casimir is given".into()),
            (None, Some(k)) => check(k > 0.0 && k < 1.5, format!("steady.k: must lie in (0, 3/2), got {k}")),
            _ => {}
        }
        let m = self.steady.mass;
        check(m > 0.0 && m.is_finite(), format!("steady.M: must be positive, got {m}"));
        check(self.n >= 100, format!("N: must be at least 100, got {}", self.n));
        let it = &self.integrator;
        check(it.dt_tdyn > 0.0 && it.dt_tdyn.is_finite(), format!("integrator.dt_tdyn: must be positive, got {}", it.dt_tdyn));
        if let Some(dt) = it.dt {
            check(dt > 0.0 && dt.is_finite(), format!("integrator.dt: must be positive, got {dt}"));
        }
        if let Some(eps) = it.softening {
            check(eps >= 0.0 && eps.is_finite(), format!("integrator.softening: must be >= 0, got {eps}"));
        }
        check(
            ["direct", "tree", "shell", "frozen"].contains(&it.method.as_str()),
            format!("integrator.method: expected direct, tree, shell or frozen, got `{}`", it.method),
        );
        check(it.theta >= 0.0 && it.theta < 1.5, format!("integrator.theta: must lie in [0, 1.5), got {}", it.theta));
        check(
            self.horizon_tdyn >= 0.0 && self.horizon_tdyn.is_finite(),
            format!("horizon_tdyn: must be >= 0, got {}", self.horizon_tdyn),
        );
        check(self.cadence_tdyn > 0.0, format!("cadence_tdyn: must be positive, got {}", self.cadence_tdyn));
        let s = &self.shift;
        check(
            s.bulk_fraction > 0.0 && s.bulk_fraction <= 1.0,
            format!("shift.bulk_fraction: must lie in (0, 1], got {}", s.bulk_fraction),
        );
        check(s.ftol > 0.0 && s.simplex_size > 0.0 && s.max_iter > 0, "shift: ftol, simplex_size and max_iter must be positive".into());
        check(
            self.concentration_radii.iter().all(|r| *r > 0.0),
            "concentration_radii: all radii must be positive".into(),
        );
        check(
            ["error", "warn", "info", "debug", "trace", "off"].contains(&self.log_level.as_str()),
            format!("log_level: unknown level `{}`", self.log_level),
        );
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "steady": {"k": 1.0, "M": 1.0},
        "perturbation": {"kind": "boost", "velocity": [0.1, 0, 0]},
        "integrator": {"dt_tdyn": 0.005, "method": "direct", "theta": 0.5},
        "N": 2000, "seed": 3, "horizon_tdyn": 1.0, "cadence_tdyn": 0.5
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.shift.bulk_fraction, 0.9);
        assert_eq!(cfg.perturbation.params["velocity"][0], 0.1);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn lists_every_violation() {
        let bad = MINIMAL.replace("\"k\": 1.0", "\"k\": 2.0").replace("\"N\": 2000", "\"N\": 5");
        let err = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("steady.k") && err.contains("N:"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields_and_bad_json() {
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"seed\"", "\"sead\"")).is_err());
        assert!(ExperimentConfig::from_json("{ not json").is_err());
    }
}
