use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run::run_with, RhsMode, Solver, SolverConfig, StepControl};
use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::params::RegParams;

/// `mu2` halvings at `mu1 = 0.05`, then `mu1` halvings at the smallest `mu2`.
pub fn default_schedule() -> Vec<(f64, f64)> {
    let mut s: Vec<(f64, f64)> = (0..7).map(|i| (0.05, 0.1 / 2f64.powi(i))).collect();
    let mu2 = s.last().expect("non-empty").1;
    for i in 1..=3 {
        s.push((0.05 / 2f64.powi(i), mu2));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationEntry {
    pub mu1: f64,
    pub mu2: f64,
    pub steps: u64,
    pub final_linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub entries: Vec<ContinuationEntry>,
    pub dt: f64,
    /// `||f_i(T) - f_{i+1}(T)||_inf`.
    pub differences: Vec<f64>,
    /// `"mu2"` or `"mu1"` per difference.
    pub stages: Vec<String>,
    /// `differences[i] / differences[i + 1]`.
    pub shrink: Vec<f64>,
    /// Shrink factors between consecutive `mu2` halvings.
    pub mu2_shrink: Vec<f64>,
    pub monotone: bool,
    pub flags: Vec<String>,
    /// `||f_last(T) - f_exact(T)||_inf` when an exact run was requested.
    pub exact_gap: Option<f64>,
}

impl ContinuationReport {
    pub fn mu2_shrink_min(&self) -> Option<f64> {
        self.mu2_shrink.iter().copied().reduce(f64::min)
    }

    /// `exact_gap < 2 * last increment`.
    pub fn exact_within_bound(&self) -> Option<bool> {
        let gap = self.exact_gap?;
        let last = *self.differences.last()?;
        Some(gap < 2.0 * last)
    }
}

pub fn validate_schedule(schedule: &[(f64, f64)]) -> Result<()> {
    if schedule.is_empty() {
        return Err(MuskatError::InvalidParameter("empty schedule".into()));
    }
    let mut mu1_phase = false;
    for w in schedule.windows(2) {
        let ((a1, a2), (b1, b2)) = (w[0], w[1]);
        let ok = if b1 == a1 {
            !mu1_phase && b2 < a2
        } else {
            mu1_phase = true;
            b1 < a1 && b2 <= a2
        };
        if !ok {
            return Err(MuskatError::InvalidParameter(format!(
                "schedule must shrink mu2 at fixed mu1 first, then mu1: ({a1}, {a2}) -> ({b1}, {b2})"
            )));
        }
    }
    Ok(())
}

/// Run every parameter pair from the same data with one common step and
/// compare final snapshots.
pub fn continuation(
    f0: &InterfaceField,
    cfg: &SolverConfig,
    schedule: &[(f64, f64)],
    with_exact: bool,
) -> Result<ContinuationReport> {
    validate_schedule(schedule)?;
    let grid = *f0.grid();
    let mut configs: Vec<SolverConfig> = schedule
        .iter()
        .map(|&(mu1, mu2)| {
            let mut c = cfg.clone();
            c.params = RegParams {
                mu1,
                mu2,
                cutoff: cfg.params.cutoff,
            };
            c.rhs = RhsMode::Regularized;
            c
        })
        .collect();
    if with_exact {
        let mut c = configs.last().expect("non-empty").clone();
        c.rhs = RhsMode::Exact;
        configs.push(c);
    }
    let solvers: Vec<Solver> = configs
        .iter()
        .map(|c| Solver::new(grid, c.clone()))
        .collect::<Result<_>>()?;
    let dt = match cfg.step {
        StepControl::Fixed { dt } => dt,
        _ => solvers
            .iter()
            .map(Solver::suggested_dt)
            .fold(f64::INFINITY, f64::min),
    };
    let runs: Vec<_> = configs
        .into_par_iter()
        .map(|mut c| {
            c.step = StepControl::Fixed { dt };
            let solver = Solver::new(grid, c)?;
            run_with(&solver, f0, &[])
        })
        .collect::<Result<_>>()?;
    let mut flags = Vec::new();
    for (r, c) in runs.iter().zip(schedule.iter().map(Some).chain([None])) {
        if let Some(a) = &r.abort {
            let label = c.map_or("exact".to_string(), |(m1, m2)| format!("({m1}, {m2})"));
            return Err(MuskatError::RunAborted(format!(
                "run {label} stopped at t = {}: {}",
                a.t, a.message
            )));
        }
    }
    let finals: Vec<&InterfaceField> = runs.iter().map(|r| &r.final_state.f).collect();
    let n_sched = schedule.len();
    let mut differences = Vec::new();
    let mut stages = Vec::new();
    for i in 0..n_sched.saturating_sub(1) {
        differences.push(finals[i].sub(finals[i + 1])?.max_abs());
        stages.push(if schedule[i].0 == schedule[i + 1].0 { "mu2" } else { "mu1" }.to_string());
    }
    let shrink: Vec<f64> = differences.windows(2).map(|w| w[0] / w[1]).collect();
    let mut mu2_shrink = Vec::new();
    for (i, s) in shrink.iter().enumerate() {
        if stages[i] == "mu2" && stages[i + 1] == "mu2" {
            mu2_shrink.push(*s);
        }
    }
    let mut monotone = true;
    for (i, s) in shrink.iter().enumerate() {
        if *s <= 1.0 {
            monotone = false;
            flags.push(format!(
                "difference {} ({}) does not shrink: factor {s:.4}",
                i + 1,
                stages[i + 1]
            ));
        }
    }
    let exact_gap = if with_exact {
        Some(finals[n_sched - 1].sub(finals[n_sched])?.max_abs())
    } else {
        None
    };
    let entries = runs
        .iter()
        .zip(schedule)
        .map(|(r, &(mu1, mu2))| ContinuationEntry {
            mu1,
            mu2,
            steps: r.final_state.steps,
            final_linf: r.final_state.f.max_abs(),
        })
        .collect();
    Ok(ContinuationReport {
        entries,
        dt,
        differences,
        stages,
        shrink,
        mu2_shrink,
        monotone,
        flags,
        exact_gap,
    })
}
