//! Frozen regression constants standing in for unspecified constants.
//!
//! A constant is `margin * max_measured` over the calibration campaign. An
//! experiment whose key is missing downgrades the matching assertion to a
//! report.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::result::{CalibrationSample, RunResult};

pub const CALIBRATION_VERSION: u32 = 1;
pub const DEFAULT_MARGIN: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedConstant {
    pub value: f64,
    pub max_measured: f64,
    pub samples: usize,
    pub context: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub margin: f64,
    /// How the file was produced.
    pub command: String,
    pub constants: BTreeMap<String, CalibratedConstant>,
}

impl Calibration {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.constants.get(key).map(|c| c.value)
    }

    pub fn from_results(results: &[RunResult], margin: f64, command: &str) -> Result<Self> {
        if !(margin >= 1.0 && margin.is_finite()) {
            return Err(HarnessError::Calibration(format!(
                "margin must be at least 1, got {margin}"
            )));
        }
        let mut constants = BTreeMap::new();
        for r in results {
            if let Some(v) = r.hard_failures().first() {
                return Err(HarnessError::Calibration(format!(
                    "experiment '{}' failed '{}' during calibration",
                    r.manifest.name, v.id
                )));
            }
            for (key, CalibrationSample { max_measured, samples, context }) in &r.manifest.calibration_samples {
                if constants.contains_key(key) {
                    return Err(HarnessError::Calibration(format!("duplicate key '{key}'")));
                }
                constants.insert(
                    key.clone(),
                    CalibratedConstant {
                        value: margin * max_measured,
                        max_measured: *max_measured,
                        samples: *samples,
                        context: context.clone(),
                    },
                );
            }
        }
        Ok(Self {
            version: CALIBRATION_VERSION,
            margin,
            command: command.to_string(),
            constants,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: Calibration = serde_json::from_str(text)?;
        if c.version != CALIBRATION_VERSION {
            return Err(HarnessError::Calibration(format!(
                "unsupported version {} (expected {CALIBRATION_VERSION})",
                c.version
            )));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Calibration shipped with the default battery.
pub const FROZEN: &str = include_str!("../calibration/default.json");

pub fn frozen() -> Result<Calibration> {
    Calibration::parse(FROZEN)
}
