//! Experiment configs: a command id, a seed and a parameter table.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::args::Format;

/// `command = "propa sz"`, `seed = 1`, then a `[params]` table keyed by
/// parameter name (the long flag with `-` replaced by `_`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub params: toml::Table,
}

impl ExperimentConfig {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self { command: command.into(), seed, out: None, format: Format::Json, params: toml::Table::new() }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<toml::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Applies `overrides` on top of the serialized parameters and reads them back.
pub fn apply_params<P>(params: &P, overrides: &toml::Table) -> Result<P>
where
    P: Serialize + serde::de::DeserializeOwned,
{
    let mut table = toml::Table::try_from(params)?;
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    toml::Value::Table(table).try_into().context("invalid [params]")
}
