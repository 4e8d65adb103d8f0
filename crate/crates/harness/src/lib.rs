//! Experiment harness for the Muskat numerical laboratory: configuration,
//! the experiment kinds, batteries, calibration and result files.

pub mod battery;
pub mod calibration;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod plots;
pub mod result;

pub use battery::{exit_code, run_battery, summary_table, worker_budget};
pub use calibration::Calibration;
pub use config::{Document, ExperimentKind, ExperimentSpec, RunConfig, DEFAULT_BATTERY};
pub use error::{HarnessError, Result};
pub use experiments::run_experiment;
pub use result::{RunResult, Verdict};
