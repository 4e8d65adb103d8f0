use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Scheme, Solver, SolverConfig, SolverState, StepControl};
use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::norms;
use crate::singular::SingularIntegral;

/// Quantity recorded at every probe time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "probe")]
pub enum Probe {
    L2,
    Linf,
    Max,
    Min,
    Lip,
    /// `max |N(f) + mu1 Lap f|`.
    RhsSup,
    /// `max |grad (N(f) + mu1 Lap f)|`.
    RhsLip,
    /// `min_x partial_1 f`, affine part included.
    DerivMin,
    /// `max_x partial_1 f`, affine part included.
    DerivMax,
    Holder { s: f64 },
    GradHolder { s: f64 },
    Sobolev { s: f64 },
    /// `t ||grad f||_{C^{1/2} dot}`.
    Smoothing,
    /// Amplitude `2 |f_hat(k)| / N^d` of one Fourier mode.
    Mode { k: [i64; 2] },
    Triebel { s: f64, p: f64, q: f64 },
}

impl Probe {
    pub fn column(&self, dim: usize) -> String {
        match self {
            Probe::L2 => "l2".into(),
            Probe::Linf => "linf".into(),
            Probe::Max => "max".into(),
            Probe::Min => "min".into(),
            Probe::Lip => "lip".into(),
            Probe::RhsSup => "rhs_sup".into(),
            Probe::RhsLip => "rhs_lip".into(),
            Probe::DerivMin => "deriv_min".into(),
            Probe::DerivMax => "deriv_max".into(),
            Probe::Holder { s } => format!("holder_{s}"),
            Probe::GradHolder { s } => format!("grad_holder_{s}"),
            Probe::Sobolev { s } => format!("sobolev_{s}"),
            Probe::Smoothing => "smoothing".into(),
            Probe::Mode { k } if dim == 1 => format!("mode_{}", k[0]),
            Probe::Mode { k } => format!("mode_{}_{}", k[0], k[1]),
            Probe::Triebel { s, p, q } => format!("triebel_{s}_{p}_{q}"),
        }
    }

    fn evaluate(&self, solver: &Solver, f: &InterfaceField, t: f64) -> Result<f64> {
        Ok(match *self {
            Probe::L2 => norms::l2(f),
            Probe::Linf => norms::linf(f),
            Probe::Max => f.argmax().1,
            Probe::Min => f.argmin().1,
            Probe::Lip => norms::lip(f)?.aggregate,
            Probe::RhsSup => solver.full_rhs(f)?.max_abs(),
            Probe::RhsLip => norms::lip(&solver.full_rhs(f)?)?.aggregate,
            Probe::DerivMin => f.gradient()?[0].argmin().1,
            Probe::DerivMax => f.gradient()?[0].argmax().1,
            Probe::Holder { s } => norms::holder_seminorm(f, s)?,
            Probe::GradHolder { s } => norms::gradient_holder_seminorm(f, s)?,
            Probe::Sobolev { s } => norms::sobolev_seminorm(f, s)?,
            Probe::Smoothing => norms::smoothing_statistic(f, t)?,
            Probe::Mode { k } => mode_amplitude(f, k),
            Probe::Triebel { s, p, q } => norms::triebel_seminorm(f, s, p, q)?,
        })
    }
}

fn mode_amplitude(f: &InterfaceField, k: [i64; 2]) -> f64 {
    let g = f.grid();
    let n = g.n() as i64;
    let idx = if g.dim() == 1 {
        k[0].rem_euclid(n) as usize
    } else {
        (k[0].rem_euclid(n) * n + k[1].rem_euclid(n)) as usize
    };
    2.0 * f.spectrum()[idx].norm() / g.len() as f64
}

/// One row per probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl DiagnosticsSeries {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Metadata as `# key: value` lines, then a header and the rows.
    /// Values use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: u64,
    pub rejected: u64,
    pub node_count: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub t: f64,
    pub step: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: DiagnosticsSeries,
    pub final_state: SolverState,
    pub stats: RunStats,
    /// Set when stepping failed; `series` holds everything up to the failure.
    pub abort: Option<AbortInfo>,
}

impl RunResult {
    pub fn final_field(&self) -> &InterfaceField {
        &self.final_state.f
    }
}

/// Step-size bookkeeping shared by single and paired runs.
struct Marcher<'a> {
    solver: &'a Solver,
    dt: f64,
    cap: f64,
    err_prev: f64,
    /// `N(f)` (or the full right-hand side for RK4) at the current state.
    cache: Option<InterfaceField>,
}

impl<'a> Marcher<'a> {
    fn new(solver: &'a Solver) -> Self {
        let cfg = solver.config();
        let dt = match cfg.step {
            StepControl::Fixed { dt } => dt,
            StepControl::Auto | StepControl::Adaptive { .. } => solver.suggested_dt(),
        };
        let cap = match cfg.scheme {
            Scheme::Imex1 => solver.monotone_bound(),
            Scheme::Rk4 => solver.monotone_bound().min(solver.cfl_bound()),
        };
        Self {
            solver,
            dt,
            cap,
            err_prev: 1.0,
            cache: None,
        }
    }

    fn explicit_part(&self, f: &InterfaceField) -> Result<InterfaceField> {
        match self.solver.config().scheme {
            Scheme::Imex1 => self.solver.integral_term(f),
            Scheme::Rk4 => self.solver.full_rhs(f),
        }
    }

    /// One accepted step of at most `limit`; returns the new state and the
    /// step taken.
    fn advance(&mut self, state: &SolverState, limit: f64) -> Result<(SolverState, f64)> {
        let adaptive = match self.solver.config().step {
            StepControl::Adaptive { atol, rtol } => Some((atol, rtol)),
            _ => None,
        };
        let Some((atol, rtol)) = adaptive else {
            let dt = self.dt.min(limit);
            return Ok((self.solver.step(state, dt)?, dt));
        };
        let mut rejected = 0;
        loop {
            let dt = self.dt.min(self.cap).min(limit);
            let r0 = match self.cache.take() {
                Some(r) => r,
                None => self.explicit_part(&state.f)?,
            };
            let trial = match self.solver.config().scheme {
                Scheme::Imex1 => self.solver.step_imex_with(state, dt, &r0)?,
                Scheme::Rk4 => self.solver.step_rk4(state, dt)?,
            };
            let r1 = self.explicit_part(&trial.f)?;
            let est = 0.5 * dt * r1.sub(&r0)?.max_abs();
            let tol = atol + rtol * trial.f.max_abs();
            let err = est / tol;
            if err <= 1.0 || dt <= 1e-14 * self.solver.config().t_final.max(1.0) {
                let factor = if err == 0.0 {
                    2.0
                } else {
                    (0.9 * err.powf(-0.35) * self.err_prev.powf(0.2)).clamp(0.2, 2.0)
                };
                self.err_prev = err.max(1e-4);
                // keep the controller's step when the limit clipped this one
                if dt >= self.dt.min(self.cap) {
                    self.dt = dt * factor;
                }
                self.cache = Some(r1);
                let mut next = trial;
                next.rejected = state.rejected + rejected;
                return Ok((next, dt));
            }
            rejected += 1;
            self.dt = dt * (0.9 * err.powf(-0.5)).clamp(0.1, 0.9);
            self.cache = Some(r0);
        }
    }
}

fn probe_row(solver: &Solver, state: &SolverState, dt: f64, probes: &[Probe]) -> Result<Vec<f64>> {
    let mut row = vec![state.t, state.steps as f64, dt];
    for p in probes {
        row.push(p.evaluate(solver, &state.f, state.t)?);
    }
    Ok(row)
}

fn columns(dim: usize, probes: &[Probe]) -> Vec<String> {
    let mut c = vec!["t".to_string(), "step".into(), "dt".into()];
    c.extend(probes.iter().map(|p| p.column(dim)));
    c
}

/// Advance `f0` to `T`, probing at the configured times. Steps are clipped
/// to land on probe times exactly.
pub fn run(f0: &InterfaceField, cfg: &SolverConfig, probes: &[Probe]) -> Result<RunResult> {
    let solver = Solver::new(*f0.grid(), cfg.clone())?;
    run_with(&solver, f0, probes)
}

/// [`run`] with a prebuilt solver.
pub fn run_with(solver: &Solver, f0: &InterfaceField, probes: &[Probe]) -> Result<RunResult> {
    let started = Instant::now();
    let cfg = solver.config();
    let times = cfg.probes.times(cfg.t_final)?;
    let mut series = DiagnosticsSeries::new(columns(f0.grid().dim(), probes));
    series.metadata = vec![
        ("grid".into(), f0.grid().describe()),
        ("scheme".into(), format!("{:?}", cfg.scheme)),
        ("rhs".into(), format!("{:?}", cfg.rhs)),
        ("mu1".into(), format!("{:?}", cfg.params.mu1)),
        ("mu2".into(), format!("{:?}", cfg.params.mu2)),
        ("tail".into(), format!("{:?}", cfg.quad.tail)),
    ];
    let mut marcher = Marcher::new(solver);
    let mut state = SolverState::initial(f0.clone());
    series.push(probe_row(solver, &state, marcher.dt, probes)?);
    let mut abort = None;
    'outer: for &target in &times {
        while state.t < target {
            let remaining = target - state.t;
            match marcher.advance(&state, remaining) {
                Ok((mut next, dt)) => {
                    if dt == remaining || next.t >= target {
                        next.t = target;
                    }
                    state = next;
                }
                Err(e) => {
                    abort = Some(AbortInfo {
                        t: state.t,
                        step: state.steps,
                        message: e.to_string(),
                    });
                    break 'outer;
                }
            }
        }
        match probe_row(solver, &state, state.last_dt, probes) {
            Ok(row) => series.push(row),
            Err(e) => {
                abort = Some(AbortInfo {
                    t: state.t,
                    step: state.steps,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    Ok(RunResult {
        stats: RunStats {
            steps: state.steps,
            rejected: state.rejected,
            node_count: solver.node_count(),
            wall_seconds: started.elapsed().as_secs_f64(),
        },
        series,
        final_state: state,
        abort,
    })
}

#[derive(Debug, Clone)]
pub struct DecomposedResult {
    /// `t, A, grad_f1_inf, a_bound`, then `M_j, m_j, B_j` per direction.
    pub series: DiagnosticsSeries,
    pub f_final: SolverState,
    pub f2_final: SolverState,
    pub abort: Option<AbortInfo>,
}

/// Evolve `f = f01 + f02` and `F_2` (from `f02`) in lockstep and record the
/// Lipschitz diagnostics of `F_1 = f - F_2`.
pub fn run_decomposed(
    f01: &InterfaceField,
    f02: &InterfaceField,
    cfg: &SolverConfig,
) -> Result<DecomposedResult> {
    f01.ensure_same_grid(f02)?;
    if matches!(cfg.step, StepControl::Adaptive { .. }) {
        return Err(MuskatError::InvalidParameter(
            "paired runs need a fixed or automatic step".into(),
        ));
    }
    let grid = *f01.grid();
    let solver = Solver::new(grid, cfg.clone())?;
    let own;
    let kernel = match solver.kernel() {
        Some(k) => k,
        None => {
            own = SingularIntegral::regularized(grid, &cfg.params, cfg.quad)?;
            &own
        }
    };
    let d = grid.dim();
    let mut cols = vec![
        "t".to_string(),
        "A".into(),
        "grad_f1_inf".into(),
        "a_bound".into(),
    ];
    for j in 0..d {
        cols.push(format!("M_{}", j + 1));
        cols.push(format!("m_{}", j + 1));
        cols.push(format!("B_{}", j + 1));
    }
    let mut series = DiagnosticsSeries::new(cols);
    let row = |f: &InterfaceField, f2: &InterfaceField, t: f64| -> Result<Vec<f64>> {
        let f1 = f.sub(f2)?;
        let ext = norms::lip_extrema(&f1)?;
        let grad_inf = norms::lip(&f1)?.components.into_iter().fold(0.0, f64::max);
        let mut r = vec![t, ext.a, grad_inf, 2.0 * d as f64 * grad_inf];
        for (j, e) in ext.directions.iter().enumerate() {
            r.push(e.upper);
            r.push(e.lower);
            r.push(norms::bj_with(kernel, &f1, f, j)?);
        }
        Ok(r)
    };
    let mut s = SolverState::initial(f01.add(f02)?);
    let mut s2 = SolverState::initial(f02.clone());
    series.push(row(&s.f, &s2.f, 0.0)?);
    let dt = match cfg.step {
        StepControl::Fixed { dt } => dt,
        _ => solver.suggested_dt(),
    };
    let mut abort = None;
    'outer: for target in cfg.probes.times(cfg.t_final)? {
        while s.t < target {
            let remaining = target - s.t;
            let step = dt.min(remaining);
            let pair = solver
                .step(&s, step)
                .and_then(|a| Ok((a, solver.step(&s2, step)?)));
            match pair {
                Ok((mut a, mut b)) => {
                    if step == remaining {
                        a.t = target;
                        b.t = target;
                    }
                    s = a;
                    s2 = b;
                }
                Err(e) => {
                    abort = Some(AbortInfo {
                        t: s.t,
                        step: s.steps,
                        message: e.to_string(),
                    });
                    break 'outer;
                }
            }
        }
        series.push(row(&s.f, &s2.f, s.t)?);
    }
    Ok(DecomposedResult {
        series,
        f_final: s,
        f2_final: s2,
        abort,
    })
}
