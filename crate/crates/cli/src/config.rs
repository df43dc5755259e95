//! JSON configuration.
//!
//! A run config is a flat object of model parameters with an optional
//! `metrics` object:
//!
//! ```json
//! { "q": 0.532, "steps": 2000000, "seed": 7, "metrics": { "threshold": 3.0 } }
//! ```
//!
//! A sweep config is recognised by its `axes` key:
//!
//! ```json
//! { "base": { "steps": 1000000 },
//!   "axes": [ { "param": "q", "values": [0.52, 0.53] } ],
//!   "replicates": 5, "master_seed": 1 }
//! ```
//!
//! Missing keys take the baseline defaults (n = 50, lambda = 3, r = 0.2,
//! w = 0.5, threshold = 3.0). Unknown keys are rejected.

use powervac::sweep::SweepConfig;
use powervac::{MetricsConfig, ModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("config range error: {0}")]
    Range(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: ModelParams,
    #[serde(default)]
    pub metrics: MetricsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

impl Config {
    /// A run config becomes a single-point sweep.
    pub fn into_sweep(self) -> SweepConfig {
        match self {
            Config::Sweep(s) => s,
            Config::Run(r) => SweepConfig {
                base: r.params,
                metrics: r.metrics,
                master_seed: r.params.seed,
                ..Default::default()
            },
        }
    }
}

fn deserialize<T: for<'de> Deserialize<'de>>(value: serde_json::Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parses and validates a run or sweep config, applying defaults.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Schema {
        path: ".".into(),
        message: e.to_string(),
    })?;
    let Some(object) = value.as_object() else {
        return Err(ConfigError::Schema {
            path: ".".into(),
            message: "expected a JSON object".into(),
        });
    };
    if object.contains_key("axes") {
        let sweep: SweepConfig = deserialize(value)?;
        sweep
            .base
            .validate()
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        sweep
            .validate()
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        Ok(Config::Sweep(sweep))
    } else {
        // `flatten` loses key paths in errors, so split the two parts by hand.
        let mut object = object.clone();
        let metrics = match object.remove("metrics") {
            Some(m) => deserialize(m).map_err(|e| match e {
                ConfigError::Schema { path, message } => ConfigError::Schema {
                    path: format!("metrics.{path}"),
                    message,
                },
                other => other,
            })?,
            None => MetricsConfig::default(),
        };
        let params = deserialize(serde_json::Value::Object(object))?;
        let run = RunConfig { params, metrics };
        run.params
            .validate()
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        run.metrics
            .validate()
            .map_err(|e| ConfigError::Range(e.to_string()))?;
        Ok(Config::Run(run))
    }
}

/// Resolved config as JSON, with every default written out.
pub fn emit_config(config: &Config) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}
