use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, FieldMode};
use crate::dispersive_frame::ValidityReport;
use crate::error::{Result, SmeError};
use crate::spectroscopy::PeakMetrics;

pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Trajectory,
    Ensemble,
    Sweep,
    Correlated,
    Validate,
}

/// Quantities computed from the config before the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Derived {
    pub epsilon: f64,
    pub bad_cavity_margin: f64,
    pub validity: ValidityReport,
    /// Whether the run went ahead despite a failed validity report.
    pub forced: bool,
    pub field_mode: FieldMode,
    pub omega_f: Option<f64>,
    /// α as [re, im].
    pub alpha: [f64; 2],
    pub alpha_source: String,
    pub conventions: BTreeMap<String, String>,
    pub peak: Option<PeakMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact: String,
    pub artifact_version: String,
    pub command: Command,
    pub seed: u64,
    /// Fully resolved config, defaults included.
    pub config: ExperimentConfig,
    pub derived: Derived,
    pub extras: BTreeMap<String, f64>,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SmeError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| SmeError::Config(e.to_string()))?;
        if m.schema_version != MANIFEST_SCHEMA {
            return Err(SmeError::Config(format!(
                "manifest schema {} is not supported",
                m.schema_version
            )));
        }
        Ok(m)
    }

    /// SHA-256 over everything that determines the numbers: wall-clock time
    /// and the output directory are blanked first.
    pub fn content_hash(&self) -> String {
        let mut m = self.clone();
        m.wall_clock_seconds = 0.0;
        m.config.output.dir.clear();
        let text = serde_json::to_string(&m).expect("manifest serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
