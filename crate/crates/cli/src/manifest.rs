//! What to run: target, parameters, bounds and output settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fuel used when neither the manifest nor the environment sets one.
pub const BUILTIN_FUEL: usize = 1000;
pub const FUEL_ENV: &str = "RELMONAD_DEFAULT_FUEL";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub target: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub fuel: Option<usize>,
    #[serde(default)]
    pub state_cap: Option<usize>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunManifest {
    pub fn new(target: impl Into<String>) -> Self {
        RunManifest { target: target.into(), ..Default::default() }
    }

    pub fn param(mut self, k: &str, v: &str) -> Self {
        self.params.insert(k.to_string(), v.to_string());
        self
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Manifest(format!("{}: {e}", path.display())))
    }

    /// Fuel from the manifest, else `RELMONAD_DEFAULT_FUEL`, else the
    /// built-in default.
    pub fn resolved_fuel(&self) -> Result<usize, CliError> {
        let fuel = match self.fuel {
            Some(f) => f,
            None => match std::env::var(FUEL_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| CliError::InvalidParameter {
                    name: FUEL_ENV.into(),
                    reason: format!("`{v}` is not a non-negative integer"),
                })?,
                Err(_) => BUILTIN_FUEL,
            },
        };
        if fuel == 0 {
            return Err(CliError::InvalidParameter { name: "fuel".into(), reason: "must be positive".into() });
        }
        Ok(fuel)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.params.get(name).map(String::as_str)
    }

    pub fn int_param(&self, name: &str, default: i64) -> Result<i64, CliError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| CliError::InvalidParameter {
                name: name.into(),
                reason: format!("`{v}` is not an integer"),
            }),
        }
    }

    pub fn bool_param(&self, name: &str, default: bool) -> Result<bool, CliError> {
        match self.get(name) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(CliError::InvalidParameter { name: name.into(), reason: format!("`{v}` is not a boolean") }),
        }
    }

    /// Rejects parameters the target does not read.
    pub fn only_params(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::InvalidParameter {
                name: k.clone(),
                reason: format!("not a parameter of `{}` (expected one of: {})", self.target, allowed.join(", ")),
            }),
            None => Ok(()),
        }
    }
}

/// Parses `k=v`.
pub fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(format!("expected k=v, got `{s}`")),
    }
}
