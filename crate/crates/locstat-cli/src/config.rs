//! Experiment configuration documents. One JSON document describes one
//! experiment; unknown keys are rejected everywhere and every numeric
//! field is revalidated on load.

use serde::{Deserialize, Serialize};

use locstat::model::{mfbm_to_process_spec, MfbmSpec, ProcessSpec, ValidationConfig, DEFAULT_Q};
use locstat::raretail::TailMethod;
use locstat::{Error, Result};

/// A process instance: either a direct specification or one derived from a
/// standardized multifractional field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    Spec { spec: Box<ProcessSpec> },
    Mfbm { spec: MfbmSpec },
}

impl ProcessConfig {
    pub fn build(&self) -> Result<ProcessSpec> {
        match self {
            ProcessConfig::Spec { spec } => Ok((**spec).clone()),
            ProcessConfig::Mfbm { spec } => mfbm_to_process_spec(spec),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Asympt(AsymptConfig),
    Pickands(PickandsConfig),
    Tail(TailConfig),
    Compare(CompareRunConfig),
    Validate(ValidateConfig),
    Sandwich(SandwichRunConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Asympt(_) => "asympt",
            ExperimentConfig::Pickands(_) => "pickands",
            ExperimentConfig::Tail(_) => "tail",
            ExperimentConfig::Compare(_) => "compare",
            ExperimentConfig::Validate(_) => "validate",
            ExperimentConfig::Sandwich(_) => "sandwich",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentConfig::Asympt(c) => c.seed,
            ExperimentConfig::Pickands(c) => c.seed,
            ExperimentConfig::Tail(c) => c.seed,
            ExperimentConfig::Compare(c) => c.seed,
            ExperimentConfig::Validate(c) => c.seed,
            ExperimentConfig::Sandwich(c) => c.seed,
        }
    }

    pub fn out_dir(&self) -> Option<&str> {
        match self {
            ExperimentConfig::Asympt(c) => c.out.as_deref(),
            ExperimentConfig::Pickands(c) => c.out.as_deref(),
            ExperimentConfig::Tail(c) => c.out.as_deref(),
            ExperimentConfig::Compare(c) => c.out.as_deref(),
            ExperimentConfig::Validate(c) => c.out.as_deref(),
            ExperimentConfig::Sandwich(c) => c.out.as_deref(),
        }
    }

    pub fn threads(&self) -> Option<usize> {
        match self {
            ExperimentConfig::Asympt(c) => c.threads,
            ExperimentConfig::Pickands(c) => c.threads,
            ExperimentConfig::Tail(c) => c.threads,
            ExperimentConfig::Compare(c) => c.threads,
            ExperimentConfig::Validate(c) => c.threads,
            ExperimentConfig::Sandwich(c) => c.threads,
        }
    }
}

/// Parse a config document, reporting the offending field path on error.
///
/// The experiment tag is peeled off first so the per-experiment payload
/// deserializes directly — internally tagged enums buffer their content
/// and would otherwise lose the field path in error reports.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config {
        path: ".".into(),
        message: e.to_string(),
    })?;
    let obj = value.as_object_mut().ok_or_else(|| Error::Config {
        path: ".".into(),
        message: "config document must be a JSON object".into(),
    })?;
    let tag = obj
        .remove("experiment")
        .and_then(|v| v.as_str().map(String::from))
        .ok_or_else(|| Error::Config {
            path: "experiment".into(),
            message: "missing or non-string `experiment` tag".into(),
        })?;
    let payload = serde_json::Value::Object(std::mem::take(obj));
    fn section<T: serde::de::DeserializeOwned>(payload: serde_json::Value) -> Result<T> {
        serde_path_to_error::deserialize(payload).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
    Ok(match tag.as_str() {
        "asympt" => ExperimentConfig::Asympt(section(payload)?),
        "pickands" => ExperimentConfig::Pickands(section(payload)?),
        "tail" => ExperimentConfig::Tail(section(payload)?),
        "compare" => ExperimentConfig::Compare(section(payload)?),
        "validate" => ExperimentConfig::Validate(section(payload)?),
        "sandwich" => ExperimentConfig::Sandwich(section(payload)?),
        other => {
            return Err(Error::Config {
                path: "experiment".into(),
                message: format!(
                    "unknown experiment `{other}` (expected asympt, pickands, tail, compare, \
                     validate, or sandwich)"
                ),
            })
        }
    })
}

/// Closed-form evaluation target.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AsymptTarget {
    /// The stationary unit-variance baseline over a horizon.
    Stationary { horizon: f64, a: f64, alpha: f64 },
    /// The three-regime formula for a configured process.
    Process { process: ProcessConfig },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptConfig {
    pub target: AsymptTarget,
    pub h_alpha: f64,
    pub u_ladder: Vec<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickandsConfig {
    pub alpha: f64,
    /// Defaults to the calibrated per-index ladder.
    #[serde(default)]
    pub s_ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub mesh: Option<f64>,
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub process: ProcessConfig,
    pub grid: GridConfig,
    pub u: f64,
    pub n_samples: usize,
    pub method: TailMethod,
    /// Export this many sampled paths as a columnar CSV (0 = none).
    #[serde(default)]
    pub export_paths: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRunConfig {
    pub process: ProcessConfig,
    #[serde(default)]
    pub u_ladder: Option<Vec<f64>>,
    /// Fixed Pickands constant; estimated at the calibrated defaults when
    /// absent.
    #[serde(default)]
    pub h_alpha: Option<f64>,
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub method: Option<TailMethod>,
    #[serde(default)]
    pub max_grid_points: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub process: ProcessConfig,
    #[serde(default)]
    pub validation: Option<ValidationConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichRunConfig {
    pub process: ProcessConfig,
    #[serde(default = "default_sandwich_u")]
    pub u: f64,
    #[serde(default = "default_sandwich_nu")]
    pub nu: f64,
    #[serde(default = "default_sandwich_s")]
    pub s_horizon: f64,
    #[serde(default = "default_sandwich_n")]
    pub n_samples: usize,
    #[serde(default = "default_sandwich_points")]
    pub grid_points: usize,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_sandwich_u() -> f64 {
    3.0
}
fn default_sandwich_nu() -> f64 {
    0.3
}
fn default_sandwich_s() -> f64 {
    4.0
}
fn default_sandwich_n() -> usize {
    100_000
}
fn default_sandwich_points() -> usize {
    257
}
fn default_q() -> f64 {
    DEFAULT_Q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected_with_field_path() {
        let doc = r#"{
            "experiment": "pickands",
            "alpha": 1.0,
            "bogus": 3
        }"#;
        match parse_config(doc) {
            Err(Error::Config { message, .. }) => {
                assert!(message.contains("bogus"), "message: {message}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn nested_error_carries_path() {
        let doc = r#"{
            "experiment": "tail",
            "process": {"kind": "spec", "spec": {
                "start": 0.0, "end": 1.0,
                "index": {"alpha0": 1.0, "b": 1.0, "beta": 1.0, "delta": 0.5,
                          "profile": {"kind": "constant", "value": "oops"}},
                "variance": {"c": 1.0, "gamma": 1.0, "t0": 0.5,
                             "profile": {"kind": "constant", "value": 1.0}},
                "scale": {"a0": 1.0, "profile": {"kind": "constant", "value": 1.0}},
                "correlation": {"kind": "local_exp"}
            }},
            "grid": {"start": 0.0, "end": 1.0, "points": 16},
            "u": 3.0,
            "n_samples": 1000,
            "method": "crude"
        }"#;
        match parse_config(doc) {
            Err(Error::Config { path, .. }) => {
                assert!(path.contains("process"), "path: {path}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_pickands_config() {
        let doc = r#"{"experiment": "pickands", "alpha": 1.0, "seed": 7}"#;
        let cfg = parse_config(doc).unwrap();
        assert_eq!(cfg.name(), "pickands");
        assert_eq!(cfg.seed(), Some(7));
        let echo = serde_json::to_string(&cfg).unwrap();
        let back = parse_config(&echo).unwrap();
        assert_eq!(back.seed(), Some(7));
    }
}
