//! The run configuration document.
//!
//! Every threshold and magnitude the pipeline uses is surfaced in one JSON
//! document so under-specified constants stay auditable. All fields are
//! optional; omitted ones take the shipped defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appraisal::FuzzConfig;
use crate::circumplex::{AggregationOptions, EmotionGeometry, GeometryTable, IntensityScale};
use crate::emotion::Emotion;
use crate::rules::{parse_rules, RuleSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not valid configuration JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("rule file {path}: {source}")]
    Rules {
        path: PathBuf,
        source: crate::rules::ParseError,
    },
}

/// How continuous appraisal values are binned for the three-level accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningMode {
    /// Threshold at 3 only; no three-level accuracy.
    Binary,
    Soft,
    Strict,
    #[default]
    Kmeans,
    /// Boundaries read from the JSON map at `boundaries_path`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

fn default_label3_eps() -> f64 {
    0.1
}

/// Full pipeline configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Rule file to load; the embedded canonical rules when absent.
    pub rules_path: Option<PathBuf>,
    pub fuzz: FuzzConfig,
    pub intensity: IntensityScale,
    /// Per-emotion geometry overrides, merged onto the shipped table.
    pub geometry: BTreeMap<Emotion, EmotionGeometry>,
    /// Half-width of the neutral band of the three-class label.
    pub label3_eps: f64,
    /// Fold rule strengths into the aggregation weights (diagnostic mode).
    pub strength_weighted_aggregation: bool,
    pub binning_mode: BinningMode,
    /// Boundary map used when `binning_mode` is `file`; the shape matches
    /// the `bins fit` output: `{"variable": [b1, b2]}`.
    pub boundaries_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rules_path: None,
            fuzz: FuzzConfig::default(),
            intensity: IntensityScale::default(),
            geometry: BTreeMap::new(),
            label3_eps: default_label3_eps(),
            strength_weighted_aggregation: false,
            binning_mode: BinningMode::default(),
            boundaries_path: None,
            output_format: OutputFormat::default(),
        }
    }
}

impl RunConfig {
    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Json {
                path: path.to_path_buf(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.fuzz
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.intensity
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !self.label3_eps.is_finite() || self.label3_eps < 0.0 {
            return Err(ConfigError::Invalid(format!(
                "label3_eps must be non-negative, got {}",
                self.label3_eps
            )));
        }
        if self.binning_mode == BinningMode::File && self.boundaries_path.is_none() {
            return Err(ConfigError::Invalid(
                "binning_mode \"file\" requires boundaries_path".to_string(),
            ));
        }
        self.geometry_table()?;
        Ok(())
    }

    /// The shipped geometry with this configuration's overrides applied.
    pub fn geometry_table(&self) -> Result<GeometryTable, ConfigError> {
        GeometryTable::shipped()
            .with_overrides(self.geometry.clone())
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Loads the effective rule set. A CLI-level path wins over the
    /// configured one; with neither, the embedded canonical rules apply.
    pub fn load_rules(&self, cli_path: Option<&Path>) -> Result<RuleSet, ConfigError> {
        let path = cli_path.or(self.rules_path.as_deref());
        match path {
            None => Ok(RuleSet::canonical().clone()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                parse_rules(&text).map_err(|source| ConfigError::Rules {
                    path: path.to_path_buf(),
                    source,
                })
            }
        }
    }

    pub fn aggregation_options(&self) -> AggregationOptions {
        AggregationOptions {
            label3_eps: self.label3_eps,
            strength_weighted: self.strength_weighted_aggregation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let config = RunConfig::default();
        assert!(config.validate().is_ok());
        assert_eq!(config.label3_eps, 0.1);
    }

    #[test]
    fn empty_json_uses_defaults() {
        let config: RunConfig = serde_json::from_str("{}").unwrap();
        assert!(config.validate().is_ok());
        assert_eq!(config.label3_eps, 0.1);
        assert_eq!(config.binning_mode, BinningMode::Kmeans);
        assert_eq!(config.fuzz.overlap, 0.2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>("{\"no_such_field\": 1}").is_err());
    }

    #[test]
    fn file_mode_requires_boundaries_path() {
        let config: RunConfig = serde_json::from_str("{\"binning_mode\": \"file\"}").unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn geometry_override_replaces_one_row() {
        let config: RunConfig = serde_json::from_str(
            "{\"geometry\": {\"calm\": {\"mean_angle_deg\": 300.0, \"sd_deg\": 1.0, \
             \"pleasure\": 0.5, \"arousal\": -0.86}}}",
        )
        .unwrap();
        let table = config.geometry_table().unwrap();
        assert_eq!(table.angle(Emotion::Calm), 300.0);
        assert_eq!(table.angle(Emotion::Happiness), 25.09);
    }

    #[test]
    fn invalid_overlap_fails_validation() {
        let config: RunConfig = serde_json::from_str("{\"fuzz\": {\"overlap\": 0.7}}").unwrap();
        assert!(config.validate().is_err());
    }

    #[test]
    fn embedded_rules_load_without_paths() {
        let config = RunConfig {
            label3_eps: 0.1,
            ..Default::default()
        };
        let rules = config.load_rules(None).unwrap();
        assert_eq!(rules.len(), 33);
    }
}
