//! Run configuration: one TOML or JSON document holding every tunable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, NullDistribution};
use crate::signal::ExtractionConfig;
use crate::synth::CohortSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepsConfig {
    pub exp1: usize,
    pub exp2: usize,
    pub null: usize,
    pub crossval: usize,
}

impl Default for RepsConfig {
    fn default() -> Self {
        RepsConfig { exp1: 10, exp2: 1000, null: 5000, crossval: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NullConfig {
    pub pairs: usize,
    pub distribution: NullDistribution,
}

impl Default for NullConfig {
    fn default() -> Self {
        NullConfig { pairs: 134, distribution: NullDistribution::Normal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub extraction: ExtractionConfig,
    pub experiment: ExperimentConfig,
    pub reps: RepsConfig,
    pub null: NullConfig,
    pub synth: CohortSpec,
}

impl Config {
    /// Parses TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg: Config = if is_json {
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        };
        cfg.synth.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}
