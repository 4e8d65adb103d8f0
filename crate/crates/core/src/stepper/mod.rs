//! Time integration of `d_t f - mu1 Lap f = N(f, f)`.

mod continuation;
mod run;

pub use continuation::{
    continuation, default_schedule, validate_schedule, ContinuationEntry, ContinuationReport,
};
pub use run::{
    run, run_decomposed, AbortInfo, DecomposedResult, DiagnosticsSeries, Probe, RunResult, RunStats,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::grid::GridSpec;
use crate::params::RegParams;
use crate::quadrature::QuadratureSpec;
use crate::singular::{linear_constant, SingularIntegral};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Explicit Euler on the integral term, implicit viscosity.
    Imex1,
    /// Classical explicit Runge-Kutta on the full right-hand side.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    /// Cutoff kernel and viscosity from `params`.
    Regularized,
    /// Kernel without cutoff and without viscosity.
    Exact,
    /// Viscosity only.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum StepControl {
    Fixed { dt: f64 },
    /// Fixed step derived from the kernel mass (and the CFL bound for RK4).
    Auto,
    Adaptive { atol: f64, rtol: f64 },
}

impl StepControl {
    pub fn adaptive_default() -> Self {
        StepControl::Adaptive {
            atol: 1e-6,
            rtol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProbeSchedule {
    /// `count` times from `first` to `T`, geometrically spaced.
    Geometric { first: f64, count: usize },
    Uniform { count: usize },
    Times { times: Vec<f64> },
}

impl ProbeSchedule {
    /// Probe times in `(0, T]`, ascending, always ending at `T` when `T > 0`.
    pub fn times(&self, t_final: f64) -> Result<Vec<f64>> {
        if t_final == 0.0 {
            return Ok(Vec::new());
        }
        let mut out: Vec<f64> = match self {
            ProbeSchedule::Geometric { first, count } => {
                if !(*first > 0.0) || *count == 0 {
                    return Err(MuskatError::InvalidParameter(
                        "geometric probes need first > 0 and count >= 1".into(),
                    ));
                }
                let first = first.min(t_final);
                if *count == 1 {
                    vec![t_final]
                } else {
                    let ratio = (t_final / first).ln();
                    (0..*count)
                        .map(|i| first * (ratio * i as f64 / (*count - 1) as f64).exp())
                        .collect()
                }
            }
            ProbeSchedule::Uniform { count } => {
                let c = (*count).max(1);
                (1..=c).map(|i| t_final * i as f64 / c as f64).collect()
            }
            ProbeSchedule::Times { times } => times.iter().copied().filter(|&t| t > 0.0 && t <= t_final).collect(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        if let Some(last) = out.last_mut() {
            if (*last - t_final).abs() <= 1e-12 * t_final {
                *last = t_final;
            }
        }
        if out.last() != Some(&t_final) {
            out.push(t_final);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub step: StepControl,
    pub t_final: f64,
    pub params: RegParams,
    pub quad: QuadratureSpec,
    pub cfl_safety: f64,
    pub rhs: RhsMode,
    pub probes: ProbeSchedule,
}

impl SolverConfig {
    pub fn new(params: RegParams, t_final: f64) -> Self {
        Self {
            scheme: Scheme::Imex1,
            step: StepControl::Auto,
            t_final,
            params,
            quad: QuadratureSpec::default(),
            cfl_safety: 0.9,
            rhs: RhsMode::Regularized,
            probes: ProbeSchedule::Geometric {
                first: 1e-3_f64.min(t_final.max(f64::MIN_POSITIVE)),
                count: 24,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(MuskatError::InvalidParameter(format!(
                "final time must be finite and nonnegative, got {}",
                self.t_final
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(MuskatError::InvalidParameter(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        match self.step {
            StepControl::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => Err(
                MuskatError::InvalidParameter(format!("dt must be positive, got {dt}")),
            ),
            StepControl::Adaptive { atol, rtol } if !(atol > 0.0 && rtol >= 0.0) => Err(
                MuskatError::InvalidParameter("adaptive tolerances must be positive".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Viscosity actually applied.
    pub fn viscosity(&self) -> f64 {
        match self.rhs {
            RhsMode::Exact => 0.0,
            _ => self.params.mu1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub f: InterfaceField,
    pub steps: u64,
    pub rejected: u64,
    pub last_dt: f64,
}

impl SolverState {
    pub fn initial(f: InterfaceField) -> Self {
        Self {
            t: 0.0,
            f,
            steps: 0,
            rejected: 0,
            last_dt: 0.0,
        }
    }
}

/// Grid-bound integrator: the kernel plan is built once.
#[derive(Debug)]
pub struct Solver {
    grid: GridSpec,
    cfg: SolverConfig,
    kernel: Option<SingularIntegral>,
}

impl Solver {
    pub fn new(grid: GridSpec, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let kernel = match cfg.rhs {
            RhsMode::Regularized => Some(SingularIntegral::regularized(grid, &cfg.params, cfg.quad)?),
            RhsMode::Exact => Some(SingularIntegral::exact(grid, cfg.quad)?),
            RhsMode::Off => None,
        };
        Ok(Self { grid, cfg, kernel })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernel(&self) -> Option<&SingularIntegral> {
        self.kernel.as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.kernel.as_ref().map_or(0, SingularIntegral::node_count)
    }

    /// `h^2 / (2 d mu1)` scaled by the safety factor; infinite without viscosity.
    pub fn cfl_bound(&self) -> f64 {
        let mu = self.cfg.viscosity();
        if mu == 0.0 {
            return f64::INFINITY;
        }
        let h = self.grid.spacing();
        self.cfg.cfl_safety * h * h / (2.0 * self.grid.dim() as f64 * mu)
    }

    /// Largest step for which explicit Euler on the integral term is monotone.
    pub fn monotone_bound(&self) -> f64 {
        self.kernel
            .as_ref()
            .map_or(f64::INFINITY, |k| 1.0 / k.kernel_mass())
    }

    /// Step used by [`StepControl::Auto`].
    pub fn suggested_dt(&self) -> f64 {
        let base = match self.cfg.scheme {
            Scheme::Imex1 => 0.5 * self.monotone_bound(),
            Scheme::Rk4 => self.monotone_bound().min(self.cfl_bound()),
        };
        let cap = if self.cfg.t_final > 0.0 {
            self.cfg.t_final
        } else {
            1.0
        };
        if base.is_finite() {
            base.min(cap)
        } else {
            cap / 100.0
        }
    }

    /// Integral term `N(f, f)` (zero when the kernel is off).
    pub fn integral_term(&self, f: &InterfaceField) -> Result<InterfaceField> {
        match &self.kernel {
            Some(k) => k.apply(f),
            None => Ok(InterfaceField::zeros(self.grid)),
        }
    }

    /// `N(f, f) + mu1 Lap f`.
    pub fn full_rhs(&self, f: &InterfaceField) -> Result<InterfaceField> {
        let n = self.integral_term(f)?;
        let mu = self.cfg.viscosity();
        if mu == 0.0 {
            return Ok(n);
        }
        n.axpy(mu, &f.laplacian()?)
    }

    fn finish(&self, state: &SolverState, values: Result<InterfaceField>, dt: f64) -> Result<SolverState> {
        match values {
            Ok(f) => Ok(SolverState {
                t: state.t + dt,
                f,
                steps: state.steps + 1,
                rejected: state.rejected,
                last_dt: dt,
            }),
            Err(MuskatError::InvalidField(_)) => Err(MuskatError::Blowup {
                t: state.t,
                step: state.steps,
                last_linf: state.f.max_abs(),
            }),
            Err(e) => Err(e),
        }
    }

    /// `f* = f + dt N(f)`, then `(1 - dt mu1 Lap) f_new = P f*` with the 2/3 projection `P`.
    pub fn step_imex(&self, state: &SolverState, dt: f64) -> Result<SolverState> {
        let rhs = self.integral_term(&state.f)?;
        self.step_imex_with(state, dt, &rhs)
    }

    /// [`step_imex`](Self::step_imex) with a precomputed `N(f)`.
    pub fn step_imex_with(&self, state: &SolverState, dt: f64, rhs: &InterfaceField) -> Result<SolverState> {
        let explicit: Vec<f64> = state
            .f
            .values()
            .iter()
            .zip(rhs.values())
            .map(|(f, r)| f + dt * r)
            .collect();
        if explicit.iter().any(|v| !v.is_finite()) {
            return self.finish(state, Err(MuskatError::InvalidField("non-finite".into())), dt);
        }
        let grid = self.grid;
        let mu = self.cfg.viscosity();
        let spec = spectral::forward(&grid, &explicit);
        let solved: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, z)| {
                if !spectral::two_thirds_mask(&grid, k) {
                    return Complex64::new(0.0, 0.0);
                }
                let xi = grid.wavevector(k);
                z / (1.0 + dt * mu * (xi[0] * xi[0] + xi[1] * xi[1]))
            })
            .collect();
        let values = spectral::inverse_real(&grid, &solved);
        let next = state.f.with_values(values);
        self.finish(state, next, dt)
    }

    /// Classical RK4 on `N(f) + mu1 Lap f`. Negative `dt` is allowed.
    pub fn step_rk4(&self, state: &SolverState, dt: f64) -> Result<SolverState> {
        let bound = self.cfl_bound();
        if dt.abs() > bound {
            return Err(MuskatError::CflViolation { dt, bound });
        }
        let f = &state.f;
        let attempt = || -> Result<InterfaceField> {
            let k1 = self.full_rhs(f)?;
            let k2 = self.full_rhs(&f.axpy(0.5 * dt, &k1)?)?;
            let k3 = self.full_rhs(&f.axpy(0.5 * dt, &k2)?)?;
            let k4 = self.full_rhs(&f.axpy(dt, &k3)?)?;
            let values = (0..f.values().len())
                .map(|i| {
                    f.values()[i]
                        + dt / 6.0
                            * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i])
                })
                .collect();
            f.with_values(values)
        };
        self.finish(state, attempt(), dt)
    }

    pub fn step(&self, state: &SolverState, dt: f64) -> Result<SolverState> {
        match self.cfg.scheme {
            Scheme::Imex1 => self.step_imex(state, dt),
            Scheme::Rk4 => self.step_rk4(state, dt),
        }
    }
}

/// Exact solution of `d_t f = -c_d |D| f + mu1 Lap f`.
pub fn semigroup_oracle(f0: &InterfaceField, t: f64, mu1: f64) -> Result<InterfaceField> {
    let c = linear_constant(f0.grid().dim())?;
    let p = InterfaceField::new(*f0.grid(), f0.values().to_vec())?;
    let out = p.fourier_multiplier(|xi| {
        let k = xi[0].hypot(xi[1]);
        (-(c * k + mu1 * k * k) * t).exp()
    })?;
    out.with_slope(f0.slope())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, 2.0 * PI, n).unwrap()
    }

    fn cfg(rhs: RhsMode, scheme: Scheme) -> SolverConfig {
        let mut c = SolverConfig::new(RegParams::new(0.1, 0.05).unwrap(), 1.0);
        c.rhs = rhs;
        c.scheme = scheme;
        c
    }

    #[test]
    fn viscous_solve_is_diagonal() {
        let g = grid1(64);
        let solver = Solver::new(g, cfg(RhsMode::Off, Scheme::Imex1)).unwrap();
        let k = 5.0;
        let f = InterfaceField::from_fn(g, |x| (k * x[0]).cos()).unwrap();
        let dt = 0.01;
        let next = solver.step_imex(&SolverState::initial(f.clone()), dt).unwrap();
        let factor = 1.0 / (1.0 + dt * 0.1 * k * k);
        for (a, b) in next.f.values().iter().zip(f.values()) {
            assert!((a - factor * b).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_is_preserved() {
        let g = grid1(64);
        let solver = Solver::new(g, cfg(RhsMode::Regularized, Scheme::Imex1)).unwrap();
        let f = InterfaceField::constant(g, 1.25).unwrap();
        let next = solver.step_imex(&SolverState::initial(f), 0.01).unwrap();
        assert!(next.f.values().iter().all(|v| (v - 1.25).abs() < 1e-14));
    }

    #[test]
    fn rk4_cfl_and_reversal() {
        let g = grid1(64);
        let solver = Solver::new(g, cfg(RhsMode::Off, Scheme::Rk4)).unwrap();
        let f = InterfaceField::from_fn(g, |x| (3.0 * x[0]).sin() + 0.5 * (7.0 * x[0]).cos()).unwrap();
        let s0 = SolverState::initial(f.clone());
        let too_big = 2.0 * solver.cfl_bound();
        assert!(matches!(solver.step_rk4(&s0, too_big), Err(MuskatError::CflViolation { .. })));
        let dt = 1e-3;
        let fwd = solver.step_rk4(&s0, dt).unwrap();
        let back = solver.step_rk4(&fwd, -dt).unwrap();
        assert!(back.f.sub(&f).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn oracle_semigroup_property() {
        let g = grid1(64);
        let f = InterfaceField::from_fn(g, |x| x[0].cos() + 0.2 * (4.0 * x[0]).sin()).unwrap();
        let a = semigroup_oracle(&semigroup_oracle(&f, 0.1, 0.05).unwrap(), 0.2, 0.05).unwrap();
        let b = semigroup_oracle(&f, 0.3, 0.05).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
        assert!(semigroup_oracle(&f, 0.0, 0.05).unwrap().sub(&f).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn probe_times_end_at_final_time() {
        let t = ProbeSchedule::Geometric { first: 1e-3, count: 5 }.times(0.5).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 0.5);
        assert!((t[0] - 1e-3).abs() < 1e-15);
        assert!(ProbeSchedule::Uniform { count: 4 }.times(0.0).unwrap().is_empty());
    }
}
