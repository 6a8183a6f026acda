//! Run manifests: everything needed to repeat a run, plus what it wrote.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiments::{SeedRecord, Summary};
use super::output::OutputFile;
use crate::error::{QrcError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Config after command-line overrides.
    pub config: ExperimentConfig,
    pub code_version: String,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub seeds: SeedRecord,
    pub outputs: Vec<OutputFile>,
    pub status: RunStatus,
    #[serde(default)]
    pub error: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub summary: Summary,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| QrcError::Numeric(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| QrcError::Config(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QrcError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn output(&self, name: &str) -> Option<&OutputFile> {
        self.outputs.iter().find(|f| f.path == name)
    }
}
