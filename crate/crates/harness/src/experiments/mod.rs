//! Experiment kinds. Every kind returns a [`RunResult`] with at least one
//! verdict; solver failures become failing verdicts, not errors.

mod flow;
mod norms;
mod numerics;
mod paired;
mod smoothing;

use std::collections::BTreeMap;
use std::time::Instant;

use muskat_core::{
    DiagnosticsSeries, GridSpec, InterfaceField, Probe, Solver, SolverState, StepControl,
};

use crate::calibration::Calibration;
use crate::config::{ExperimentKind, ExperimentSpec};
use crate::error::Result;
use crate::result::{versions, CalibrationSample, Environment, Manifest, RunResult, Verdict};

/// Run one experiment.
pub fn run_experiment(spec: &ExperimentSpec, calibration: Option<&Calibration>) -> RunResult {
    let mut rec = Recorder::new(spec, calibration);
    let outcome = match spec.kind {
        ExperimentKind::MaxPrinciple => flow::max_principle(spec, &mut rec),
        ExperimentKind::L2Growth => flow::l2_growth(spec, &mut rec),
        ExperimentKind::Monotone2d => flow::monotone(spec, &mut rec),
        ExperimentKind::SmallSlope => flow::small_slope(spec, &mut rec),
        ExperimentKind::Smoothing => smoothing::smoothing(spec, &mut rec),
        ExperimentKind::Stability => paired::stability(spec, &mut rec),
        ExperimentKind::Scaling => paired::scaling(spec, &mut rec),
        ExperimentKind::Continuation => paired::continuation(spec, &mut rec),
        ExperimentKind::NormProperties => norms::norm_properties(spec, &mut rec),
        ExperimentKind::LinearDecay => numerics::linear_decay(spec, &mut rec),
        ExperimentKind::QuadratureOrder => numerics::quadrature_order(spec, &mut rec),
        ExperimentKind::Decomposition => numerics::decomposition(spec, &mut rec),
        ExperimentKind::Determinism => numerics::determinism(spec, &mut rec),
    };
    if let Err(e) = outcome {
        rec.note(format!("experiment stopped: {e}"));
        rec.hard("completed", false, 0.0, 0.0);
    }
    rec.finish()
}

/// Accumulates verdicts, statistics and artifacts of one experiment.
pub struct Recorder<'a> {
    spec: ExperimentSpec,
    calibration: Option<&'a Calibration>,
    verdicts: Vec<Verdict>,
    statistics: BTreeMap<String, f64>,
    records: BTreeMap<String, serde_json::Value>,
    notes: Vec<String>,
    series: Vec<(String, DiagnosticsSeries)>,
    snapshots: Vec<(String, InterfaceField)>,
    calibration_used: BTreeMap<String, f64>,
    calibration_samples: BTreeMap<String, CalibrationSample>,
    steps: u64,
    node_count: usize,
    started: Instant,
}

impl<'a> Recorder<'a> {
    fn new(spec: &ExperimentSpec, calibration: Option<&'a Calibration>) -> Self {
        Self {
            spec: spec.clone(),
            calibration,
            verdicts: Vec::new(),
            statistics: BTreeMap::new(),
            records: BTreeMap::new(),
            notes: Vec::new(),
            series: Vec::new(),
            snapshots: Vec::new(),
            calibration_used: BTreeMap::new(),
            calibration_samples: BTreeMap::new(),
            steps: 0,
            node_count: 0,
            started: Instant::now(),
        }
    }

    pub fn hard(&mut self, id: impl Into<String>, pass: bool, measured: f64, threshold: f64) {
        self.verdicts.push(Verdict {
            id: id.into(),
            pass,
            measured,
            threshold,
            hard: true,
        });
    }

    pub fn report(&mut self, id: impl Into<String>, measured: f64, threshold: f64) {
        self.verdicts.push(Verdict {
            id: id.into(),
            pass: measured <= threshold,
            measured,
            threshold,
            hard: false,
        });
    }

    pub fn stat(&mut self, key: impl Into<String>, value: f64) {
        self.statistics.insert(key.into(), value);
    }

    pub fn record(&mut self, key: impl Into<String>, value: serde_json::Value) {
        self.records.insert(key.into(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn series(&mut self, name: impl Into<String>, s: DiagnosticsSeries) {
        self.series.push((name.into(), s));
    }

    pub fn snapshot(&mut self, name: impl Into<String>, f: InterfaceField) {
        self.snapshots.push((name.into(), f));
    }

    /// Book-keep a solver run; an aborted run is a failing verdict.
    pub fn absorb(&mut self, label: &str, r: &muskat_core::RunResult) -> bool {
        self.steps += r.stats.steps;
        self.node_count = self.node_count.max(r.stats.node_count);
        match &r.abort {
            None => true,
            Some(a) => {
                self.note(format!("run {label} aborted at t = {}: {}", a.t, a.message));
                let t_final = self.spec.run.t_final;
                self.hard(format!("completed_{label}"), false, a.t, t_final);
                false
            }
        }
    }

    pub fn count_steps(&mut self, steps: u64, nodes: usize) {
        self.steps += steps;
        self.node_count = self.node_count.max(nodes);
    }

    /// `<quantity>/<experiment name>[/<detail>]`.
    pub fn calibration_key(&self, quantity: &str, detail: Option<&str>) -> String {
        match detail {
            Some(d) => format!("{quantity}/{}/{d}", self.spec.name),
            None => format!("{quantity}/{}", self.spec.name),
        }
    }

    /// Record a calibration sample and assert against the frozen constant,
    /// or report when none is available.
    pub fn calibrated(&mut self, id: &str, key: String, measured: f64, samples: usize, context: BTreeMap<String, String>) {
        self.calibration_samples.insert(
            key.clone(),
            CalibrationSample {
                max_measured: measured,
                samples,
                context,
            },
        );
        match self.calibration.and_then(|c| c.get(&key)) {
            Some(c) => {
                self.calibration_used.insert(key, c);
                self.hard(id, measured <= c, measured, c);
            }
            None => {
                self.note(format!("no calibrated constant '{key}'; '{id}' is report-only"));
                self.report(id, measured, f64::MAX);
            }
        }
    }

    fn finish(self) -> RunResult {
        let manifest = Manifest {
            name: self.spec.name.clone(),
            kind: self.spec.kind,
            spec: self.spec,
            environment: Environment::current(),
            versions: versions(),
            statistics: self.statistics,
            records: self.records,
            notes: self.notes,
            calibration_used: self.calibration_used,
            calibration_samples: self.calibration_samples,
            series_files: Vec::new(),
            snapshot_files: Vec::new(),
            node_count: self.node_count,
            steps: self.steps,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        RunResult {
            manifest,
            series: self.series,
            snapshots: self.snapshots,
            verdicts: self.verdicts,
        }
    }
}

pub(crate) fn run_profile(
    spec: &ExperimentSpec,
    f0: &InterfaceField,
    probes: &[Probe],
) -> Result<muskat_core::RunResult> {
    Ok(muskat_core::run(f0, &spec.run.solver_config(), probes)?)
}

/// Step size a fixed-step march uses under `cfg`.
pub(crate) fn planned_dt(solver: &Solver) -> f64 {
    match solver.config().step {
        StepControl::Fixed { dt } => dt,
        _ => solver.suggested_dt(),
    }
}

/// Fields at each of `times`, marching with a fixed step clipped to land on
/// every time exactly.
pub(crate) fn trajectory(
    solver: &Solver,
    f0: &InterfaceField,
    dt: f64,
    times: &[f64],
) -> Result<(Vec<InterfaceField>, u64)> {
    let mut s = SolverState::initial(f0.clone());
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while s.t < target {
            let remaining = target - s.t;
            let step = dt.min(remaining);
            let mut next = solver.step(&s, step)?;
            if step == remaining {
                next.t = target;
            }
            s = next;
        }
        out.push(s.f.clone());
    }
    Ok((out, s.steps))
}

/// Largest `increase - slack` over consecutive probes, where the slack is
/// `factor * dt * bound` with the larger step and bound of the two probes.
/// Non-positive means the sequence is non-increasing within slack.
pub(crate) fn excess_over_slack(values: &[f64], dt: &[f64], bound: &[f64], factor: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..values.len() {
        let slack = factor * dt[i].max(dt[i - 1]) * bound[i].max(bound[i - 1]);
        worst = worst.max(values[i] - values[i - 1] - slack);
    }
    if worst == f64::NEG_INFINITY {
        0.0
    } else {
        worst
    }
}

pub(crate) fn column(s: &DiagnosticsSeries, name: &str) -> Result<Vec<f64>> {
    s.column(name).ok_or_else(|| {
        crate::error::HarnessError::Invalid {
            field: "series".into(),
            message: format!("missing column '{name}'"),
        }
    })
}

/// Same samples on a grid with a different period.
pub(crate) fn on_grid(f: &InterfaceField, grid: GridSpec) -> Result<InterfaceField> {
    Ok(InterfaceField::new(grid, f.values().to_vec())?.with_slope(f.slope())?)
}


/// Samples at every `stride`-th node along each axis.
pub(crate) fn strided_values(f: &InterfaceField, stride: usize) -> Vec<f64> {
    let n = f.grid().n();
    let v = f.values();
    if f.grid().dim() == 1 {
        return v.iter().step_by(stride).copied().collect();
    }
    (0..n)
        .step_by(stride)
        .flat_map(|i| (0..n).step_by(stride).map(move |j| v[i * n + j]))
        .collect()
}

pub(crate) fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
