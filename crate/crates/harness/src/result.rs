use std::collections::BTreeMap;

use muskat_core::{DiagnosticsSeries, InterfaceField};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentKind, ExperimentSpec};

/// One checked statement. Report-only entries (`hard == false`) never fail
/// a battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub hard: bool,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match (self.hard, self.pass) {
            (false, _) => "REPORT",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub workers: usize,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            workers: rayon::current_num_threads(),
        }
    }
}

/// Largest value of a calibrated quantity seen in one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub max_measured: f64,
    pub samples: usize,
    pub context: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub kind: ExperimentKind,
    /// Full echo of the resolved experiment.
    pub spec: ExperimentSpec,
    pub environment: Environment,
    pub versions: BTreeMap<String, String>,
    pub statistics: BTreeMap<String, f64>,
    pub records: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
    /// Calibrated constants this experiment asserted against.
    pub calibration_used: BTreeMap<String, f64>,
    pub calibration_samples: BTreeMap<String, CalibrationSample>,
    pub series_files: Vec<String>,
    pub snapshot_files: Vec<String>,
    pub node_count: usize,
    pub steps: u64,
    pub wall_seconds: f64,
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("muskatlab".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("muskat-core".to_string(), muskat_core::VERSION.to_string()),
    ])
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub manifest: Manifest,
    pub series: Vec<(String, DiagnosticsSeries)>,
    pub snapshots: Vec<(String, InterfaceField)>,
    pub verdicts: Vec<Verdict>,
}

impl RunResult {
    /// No hard verdict failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| !v.hard || v.pass)
    }

    pub fn hard_failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| v.hard && !v.pass).collect()
    }

    pub fn verdict(&self, id: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    /// `PASS`, `FAIL`, or `REPORT` when nothing was asserted.
    pub fn label(&self) -> &'static str {
        if !self.passed() {
            "FAIL"
        } else if self.verdicts.iter().any(|v| v.hard) {
            "PASS"
        } else {
            "REPORT"
        }
    }

    /// First failing hard verdict, else the first hard one, else the first.
    pub fn key_verdict(&self) -> Option<&Verdict> {
        self.hard_failures()
            .first()
            .copied()
            .or_else(|| self.verdicts.iter().find(|v| v.hard))
            .or_else(|| self.verdicts.first())
    }
}
