//! Run configuration files.
//!
//! Errors carry the JSON path of the offending field, e.g.
//! `profile.timers.t2_s`, so that a caller can point at the exact key.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{Scenario, SweepParam};
use crate::error::Error;
use crate::radio::{AccountingMode, PowerProfile};
use crate::workload::{PathModel, Workload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSettings {
    #[serde(default = "default_slot_len")]
    pub slot_len_s: f64,
    #[serde(default = "default_warmup")]
    pub warmup_s: f64,
}

fn default_slot_len() -> f64 {
    3600.0
}

fn default_warmup() -> f64 {
    7200.0
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            slot_len_s: default_slot_len(),
            warmup_s: default_warmup(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json]
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            directory: None,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub label: String,
    pub workload: Workload,
    pub path: PathModel,
    /// Overrides the top-level profile for this scenario.
    #[serde(default)]
    pub profile: Option<PowerProfile>,
    #[serde(default)]
    pub accounting: Option<AccountingMode>,
}

/// A parameter sweep applied to every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Top-level configuration. `profile` falls back to
/// [`PowerProfile::literature_default`] when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub note: Option<String>,
    #[serde(default)]
    pub profile: Option<PowerProfile>,
    #[serde(default)]
    pub accounting: AccountingMode,
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }

    fn from_core(prefix: &str, err: Error) -> Self {
        match err {
            Error::InvalidInput { field, reason } => ConfigError::at(format!("{prefix}.{field}"), reason),
            other => ConfigError::at(prefix, other.to_string()),
        }
    }
}

/// A parsed configuration together with the fingerprint of its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub fingerprint: String,
}

pub fn fingerprint(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<LoadedConfig, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            if path == "." {
                path.clear();
            }
            let message = e.inner().to_string();
            // Point at the missing key itself rather than its parent object.
            if let Some(key) = message
                .strip_prefix("missing field `")
                .and_then(|rest| rest.split('`').next())
            {
                path = if path.is_empty() { key.to_owned() } else { format!("{path}.{key}") };
            }
            ConfigError::at(path, message)
        })?;
        config.validate()?;
        Ok(LoadedConfig {
            config,
            fingerprint: fingerprint(text),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(p) = &self.profile {
            p.validate().map_err(|e| ConfigError::from_core("profile", e))?;
        }
        if self.scenarios.is_empty() {
            return Err(ConfigError::at("scenarios", "at least one scenario is required"));
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError::at("output.formats", "at least one format is required"));
        }
        if let Some(sweep) = &self.sweep {
            let param: SweepParam = sweep
                .parameter
                .parse()
                .map_err(|e: Error| ConfigError::at("sweep.parameter", e.to_string()))?;
            for (i, &v) in sweep.values.iter().enumerate() {
                for scenario in self.scenarios() {
                    param
                        .apply(&scenario, v)
                        .and_then(|s| s.validate())
                        .map_err(|e| ConfigError::at(format!("sweep.values[{i}]"), e.to_string()))?;
                }
            }
        }
        let a = &self.analysis;
        if !(a.slot_len_s > 0.0 && a.slot_len_s.is_finite()) {
            return Err(ConfigError::at("analysis.slot_len_s", "must be finite and > 0"));
        }
        if !(a.warmup_s >= 0.0 && a.warmup_s.is_finite()) {
            return Err(ConfigError::at("analysis.warmup_s", "must be finite and >= 0"));
        }
        for (i, (spec, scenario)) in self.scenarios.iter().zip(self.scenarios()).enumerate() {
            let prefix = format!("scenarios[{i}]");
            if self.scenarios[..i].iter().any(|s| s.label == spec.label) {
                return Err(ConfigError::at(format!("{prefix}.label"), format!("duplicate label `{}`", spec.label)));
            }
            scenario.validate().map_err(|e| ConfigError::from_core(&prefix, e))?;
        }
        Ok(())
    }

    pub fn resolved_profile(&self) -> PowerProfile {
        self.profile.clone().unwrap_or_else(PowerProfile::literature_default)
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        let profile = self.resolved_profile();
        self.scenarios
            .iter()
            .map(|s| Scenario {
                label: s.label.clone(),
                profile: s.profile.clone().unwrap_or_else(|| profile.clone()),
                workload: s.workload,
                path: s.path,
                accounting: s.accounting.unwrap_or(self.accounting),
            })
            .collect()
    }
}
