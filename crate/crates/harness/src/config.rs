//! Configuration files: a base `[run]` table, optional `[initial]` data and
//! a list of `[[experiment]]` entries.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use muskat_core::initial::InitialData;
use muskat_core::stepper::{default_schedule, validate_schedule};
use muskat_core::{
    CutoffProfile, GridSpec, ProbeSchedule, QuadratureSpec, RegParams, Scheme, SolverConfig,
    StepControl, TailMode,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// `mu2` as a number or as the largest value that arms the `L2` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Mu2 {
    Value(f64),
    Rule(Mu2Rule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu2Rule {
    /// `(mu1 / 2)^{3/2}`.
    L2Limit,
}

impl Mu2 {
    pub fn resolve(&self, mu1: f64) -> f64 {
        match *self {
            Mu2::Value(v) => v,
            Mu2::Rule(Mu2Rule::L2Limit) => RegParams::l2_mu2_limit(mu1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dim: usize,
    pub period: f64,
    pub n: usize,
    pub mu1: f64,
    pub mu2: Mu2,
    pub cutoff: CutoffProfile,
    pub t_final: f64,
    pub scheme: Scheme,
    pub step: StepControl,
    pub cfl_safety: f64,
    pub tail: TailMode,
    pub origin_correction: bool,
    pub probes: ProbeSchedule,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            period: 2.0 * PI,
            n: 256,
            mu1: 0.1,
            mu2: Mu2::Value(0.01),
            cutoff: CutoffProfile::default(),
            t_final: 1.0,
            scheme: Scheme::Imex1,
            step: StepControl::Auto,
            cfl_safety: 0.9,
            tail: TailMode::Periodized,
            origin_correction: true,
            probes: ProbeSchedule::Geometric {
                first: 1e-3,
                count: 24,
            },
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.dim, self.period, self.n)?)
    }

    pub fn params(&self) -> RegParams {
        RegParams {
            mu1: self.mu1,
            mu2: self.mu2.resolve(self.mu1),
            cutoff: self.cutoff,
        }
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            tail: self.tail,
            origin_correction: self.origin_correction,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.params(), self.t_final);
        cfg.scheme = self.scheme;
        cfg.step = self.step;
        cfg.quad = self.quad();
        cfg.cfl_safety = self.cfl_safety;
        cfg.probes = self.probes.clone();
        cfg
    }

    fn validate(&self, at: &str) -> Result<()> {
        self.grid().map_err(|e| invalid(at, e.to_string()))?;
        self.params()
            .validate()
            .map_err(|e| invalid(&format!("{at}.mu1/mu2"), e.to_string()))?;
        self.solver_config()
            .validate()
            .map_err(|e| invalid(at, e.to_string()))?;
        self.probes
            .times(self.t_final)
            .map_err(|e| invalid(&format!("{at}.probes"), e.to_string()))?;
        Ok(())
    }
}

/// Partial run table layered over the base `[run]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPatch {
    pub dim: Option<usize>,
    pub period: Option<f64>,
    pub n: Option<usize>,
    pub mu1: Option<f64>,
    pub mu2: Option<Mu2>,
    pub cutoff: Option<CutoffProfile>,
    pub t_final: Option<f64>,
    pub scheme: Option<Scheme>,
    pub step: Option<StepControl>,
    pub cfl_safety: Option<f64>,
    pub tail: Option<TailMode>,
    pub origin_correction: Option<bool>,
    pub probes: Option<ProbeSchedule>,
}

impl RunPatch {
    pub fn apply(&self, base: &RunConfig) -> RunConfig {
        let mut r = base.clone();
        macro_rules! take {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    r.$f = v.clone();
                }
            )*};
        }
        take!(dim, period, n, mu1, mu2, cutoff, t_final, scheme, step, cfl_safety, tail, origin_correction, probes);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MaxPrinciple,
    L2Growth,
    #[serde(rename = "monotone_2d")]
    Monotone2d,
    SmallSlope,
    Smoothing,
    Stability,
    Scaling,
    Continuation,
    NormProperties,
    LinearDecay,
    QuadratureOrder,
    Decomposition,
    Determinism,
}

impl ExperimentKind {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentKind::MaxPrinciple => "max_principle",
            ExperimentKind::L2Growth => "l2_growth",
            ExperimentKind::Monotone2d => "monotone_2d",
            ExperimentKind::SmallSlope => "small_slope",
            ExperimentKind::Smoothing => "smoothing",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Continuation => "continuation",
            ExperimentKind::NormProperties => "norm_properties",
            ExperimentKind::LinearDecay => "linear_decay",
            ExperimentKind::QuadratureOrder => "quadrature_order",
            ExperimentKind::Decomposition => "decomposition",
            ExperimentKind::Determinism => "determinism",
        }
    }

    /// Parameter keys each kind accepts.
    fn allowed(&self) -> &'static [&'static str] {
        match self {
            ExperimentKind::MaxPrinciple => &["slack_factor"],
            ExperimentKind::L2Growth => &[],
            ExperimentKind::Monotone2d => &["slack_factor"],
            ExperimentKind::SmallSlope => &["slack_factor", "threshold", "sweep"],
            ExperimentKind::Smoothing => &["refine", "refinement_tolerance", "window"],
            ExperimentKind::Stability => &["deltas", "delta_tolerance", "bump_amplitude", "bump_width"],
            ExperimentKind::Scaling => &["lambda", "oracle_tolerance"],
            ExperimentKind::Continuation => &["schedule", "with_exact", "min_shrink"],
            ExperimentKind::NormProperties => &[
                "cm_orders",
                "cm_samples",
                "seed",
                "triebel_tolerance",
                "gn_family",
            ],
            ExperimentKind::LinearDecay => &["modes", "amplitude", "rate_tolerance"],
            ExperimentKind::QuadratureOrder => &["levels", "ratio_band"],
            ExperimentKind::Decomposition => &["sigmas", "s_star"],
            ExperimentKind::Determinism => &["workers"],
        }
    }
}

/// Kind-specific parameters; every field is optional and the per-kind
/// accessors supply defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindParams {
    pub slack_factor: Option<f64>,
    pub threshold: Option<f64>,
    pub sweep: Option<Vec<f64>>,
    pub refine: Option<bool>,
    pub refinement_tolerance: Option<f64>,
    pub window: Option<[f64; 2]>,
    pub deltas: Option<Vec<f64>>,
    pub delta_tolerance: Option<f64>,
    pub bump_amplitude: Option<f64>,
    pub bump_width: Option<f64>,
    pub lambda: Option<f64>,
    pub oracle_tolerance: Option<f64>,
    pub schedule: Option<Vec<[f64; 2]>>,
    pub with_exact: Option<bool>,
    pub min_shrink: Option<f64>,
    pub cm_orders: Option<Vec<u32>>,
    pub cm_samples: Option<usize>,
    pub seed: Option<u64>,
    pub triebel_tolerance: Option<f64>,
    pub gn_family: Option<Vec<[f64; 3]>>,
    pub modes: Option<Vec<i64>>,
    pub amplitude: Option<f64>,
    pub rate_tolerance: Option<f64>,
    pub levels: Option<usize>,
    pub ratio_band: Option<[f64; 2]>,
    pub sigmas: Option<Vec<f64>>,
    pub s_star: Option<f64>,
    pub workers: Option<Vec<usize>>,
}

impl KindParams {
    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! probe {
            ($($f:ident),*) => {$(
                if self.$f.is_some() {
                    keys.push(stringify!($f));
                }
            )*};
        }
        probe!(
            slack_factor, threshold, sweep, refine, refinement_tolerance, window, deltas,
            delta_tolerance, bump_amplitude, bump_width, lambda, oracle_tolerance, schedule,
            with_exact, min_shrink, cm_orders, cm_samples, seed, triebel_tolerance, gn_family,
            modes, amplitude, rate_tolerance, levels, ratio_band, sigmas, s_star, workers
        );
        keys
    }

    pub fn slack_factor(&self) -> f64 {
        self.slack_factor.unwrap_or(10.0)
    }
    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(0.1)
    }
    pub fn sweep(&self) -> Vec<f64> {
        self.sweep.clone().unwrap_or_default()
    }
    pub fn refine(&self) -> bool {
        self.refine.unwrap_or(true)
    }
    pub fn refinement_tolerance(&self) -> f64 {
        self.refinement_tolerance.unwrap_or(0.2)
    }
    pub fn deltas(&self) -> Vec<f64> {
        self.deltas.clone().unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4])
    }
    pub fn delta_tolerance(&self) -> f64 {
        self.delta_tolerance.unwrap_or(0.1)
    }
    pub fn bump_amplitude(&self) -> f64 {
        self.bump_amplitude.unwrap_or(1.0)
    }
    pub fn bump_width(&self) -> f64 {
        self.bump_width.unwrap_or(0.3)
    }
    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(2.0)
    }
    pub fn oracle_tolerance(&self) -> f64 {
        self.oracle_tolerance.unwrap_or(1e-8)
    }
    pub fn schedule(&self) -> Vec<(f64, f64)> {
        match &self.schedule {
            Some(s) => s.iter().map(|p| (p[0], p[1])).collect(),
            None => default_schedule(),
        }
    }
    pub fn with_exact(&self) -> bool {
        self.with_exact.unwrap_or(true)
    }
    pub fn min_shrink(&self) -> f64 {
        self.min_shrink.unwrap_or(1.5)
    }
    pub fn cm_orders(&self) -> Vec<u32> {
        self.cm_orders.clone().unwrap_or_else(|| (1..=5).collect())
    }
    pub fn cm_samples(&self) -> usize {
        self.cm_samples.unwrap_or(1_000_000)
    }
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
    pub fn triebel_tolerance(&self) -> f64 {
        self.triebel_tolerance.unwrap_or(0.05)
    }
    /// `(s, theta, q)` triples.
    pub fn gn_family(&self) -> Vec<[f64; 3]> {
        self.gn_family
            .clone()
            .unwrap_or_else(|| vec![[1.0, 0.5, 2.0], [1.5, 0.5, 2.0], [2.0, 0.75, 2.0]])
    }
    pub fn modes(&self) -> Vec<i64> {
        self.modes.clone().unwrap_or_else(|| vec![1, 2, 4])
    }
    pub fn amplitude(&self) -> f64 {
        self.amplitude.unwrap_or(1e-3)
    }
    pub fn rate_tolerance(&self) -> f64 {
        self.rate_tolerance.unwrap_or(0.01)
    }
    pub fn levels(&self) -> usize {
        self.levels.unwrap_or(3)
    }
    pub fn ratio_band(&self) -> [f64; 2] {
        self.ratio_band.unwrap_or([3.5, 4.5])
    }
    pub fn sigmas(&self) -> Vec<f64> {
        self.sigmas.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.01])
    }
    pub fn s_star(&self, dim: usize) -> f64 {
        self.s_star.unwrap_or(2.0 + dim as f64 / 2.0)
    }
    pub fn workers(&self) -> Vec<usize> {
        self.workers.clone().unwrap_or_else(|| vec![1, 4])
    }
}

/// One `[[experiment]]` entry as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentEntry {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub run: RunPatch,
    #[serde(default)]
    pub data: Vec<InitialData>,
    #[serde(default)]
    pub params: KindParams,
}

/// Fully resolved experiment: base run merged, default data filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub run: RunConfig,
    pub data: Vec<InitialData>,
    pub params: KindParams,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, run: RunConfig) -> Self {
        Self {
            name: kind.id().to_string(),
            kind,
            run,
            data: default_data(kind),
            params: KindParams::default(),
        }
    }

    /// Kind-specific range checks; `at` prefixes the field path in errors.
    pub fn validate(&self, at: &str) -> Result<()> {
        self.run.validate(&format!("{at}.run"))?;
        let allowed = self.kind.allowed();
        for key in self.params.set_keys() {
            if !allowed.contains(&key) {
                return Err(invalid(
                    &format!("{at}.params.{key}"),
                    format!("not used by kind '{}'", self.kind.id()),
                ));
            }
        }
        let grid = self.run.grid()?;
        for (i, d) in self.data.iter().enumerate() {
            d.build(grid)
                .map_err(|e| invalid(&format!("{at}.data[{i}]"), e.to_string()))?;
        }
        let p = &self.params;
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(&format!("{at}.params.{name}"), format!("must be positive, got {v}")))
            }
        };
        positive("slack_factor", p.slack_factor())?;
        match self.kind {
            ExperimentKind::Monotone2d | ExperimentKind::SmallSlope | ExperimentKind::LinearDecay => {
                if self.run.dim != 1 {
                    return Err(invalid(&format!("{at}.run.dim"), "this experiment is one-dimensional".into()));
                }
            }
            _ => {}
        }
        match self.kind {
            ExperimentKind::Monotone2d => {
                for (i, d) in self.data.iter().enumerate() {
                    let g = d.build(grid)?.gradient()?.remove(0);
                    let (lo, hi) = (g.argmin().1, g.argmax().1);
                    let tol = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
                    if lo < -tol && hi > tol {
                        return Err(invalid(
                            &format!("{at}.data[{i}]"),
                            format!("profile is not monotone: f' ranges over [{lo}, {hi}]"),
                        ));
                    }
                }
            }
            ExperimentKind::SmallSlope => {
                positive("threshold", p.threshold())?;
                for (i, d) in self.data.iter().enumerate() {
                    let l = muskat_core::norms::lip(&d.build(grid)?)?.aggregate;
                    if l > p.threshold() * (1.0 + 1e-9) {
                        return Err(invalid(
                            &format!("{at}.data[{i}]"),
                            format!("Lipschitz constant {l} exceeds the threshold {}", p.threshold()),
                        ));
                    }
                }
                for (i, e) in p.sweep().iter().enumerate() {
                    positive(&format!("sweep[{i}]"), *e)?;
                }
            }
            ExperimentKind::Smoothing => {
                positive("refinement_tolerance", p.refinement_tolerance())?;
                if let Some([a, b]) = p.window {
                    if !(a > 0.0 && b > a) {
                        return Err(invalid(&format!("{at}.params.window"), format!("need 0 < a < b, got [{a}, {b}]")));
                    }
                }
            }
            ExperimentKind::Stability => {
                if matches!(self.run.step, StepControl::Adaptive { .. }) {
                    return Err(invalid(&format!("{at}.run.step"), "paired runs need a fixed or automatic step".into()));
                }
                for (i, d) in p.deltas().iter().enumerate() {
                    if !(*d >= 0.0 && d.is_finite()) {
                        return Err(invalid(&format!("{at}.params.deltas[{i}]"), format!("must be nonnegative, got {d}")));
                    }
                }
                positive("bump_width", p.bump_width())?;
                positive("delta_tolerance", p.delta_tolerance())?;
            }
            ExperimentKind::Scaling => {
                let l = p.lambda();
                if ![1.0, 2.0, 4.0].contains(&l) {
                    return Err(invalid(&format!("{at}.params.lambda"), format!("must be 1, 2 or 4, got {l}")));
                }
                if matches!(self.run.step, StepControl::Adaptive { .. }) {
                    return Err(invalid(&format!("{at}.run.step"), "paired runs need a fixed or automatic step".into()));
                }
            }
            ExperimentKind::Continuation => {
                let sched = p.schedule();
                for (i, &(m1, m2)) in sched.iter().enumerate() {
                    RegParams::new(m1, m2)
                        .map_err(|e| invalid(&format!("{at}.params.schedule[{i}]"), e.to_string()))?;
                }
                validate_schedule(&sched)
                    .map_err(|e| invalid(&format!("{at}.params.schedule"), e.to_string()))?;
            }
            ExperimentKind::NormProperties => {
                if p.cm_orders().iter().any(|&m| m == 0) {
                    return Err(invalid(&format!("{at}.params.cm_orders"), "orders must be at least 1".into()));
                }
                for (i, [s, th, q]) in p.gn_family().into_iter().enumerate() {
                    let ok = s > 0.0 && th > 0.0 && th < 1.0 && q >= 1.0 && (th * s).fract() != 0.0 && th * s < 3.0;
                    if !ok {
                        return Err(invalid(&format!("{at}.params.gn_family[{i}]"), format!("invalid (s, theta, q) = ({s}, {th}, {q})")));
                    }
                }
            }
            ExperimentKind::LinearDecay => {
                positive("amplitude", p.amplitude())?;
                if p.modes().iter().any(|&k| k < 1 || 3 * k as usize >= self.run.n) {
                    return Err(invalid(&format!("{at}.params.modes"), "modes must lie in [1, N/3)".into()));
                }
            }
            ExperimentKind::QuadratureOrder => {
                if p.levels() < 3 {
                    return Err(invalid(&format!("{at}.params.levels"), "need at least 3 grid levels".into()));
                }
            }
            ExperimentKind::Decomposition => {
                let d = self.run.dim as f64;
                if p.s_star(self.run.dim) < 1.0 + d / 2.0 {
                    return Err(invalid(&format!("{at}.params.s_star"), format!("must be at least {}", 1.0 + d / 2.0)));
                }
                for (i, s) in p.sigmas().iter().enumerate() {
                    positive(&format!("sigmas[{i}]"), *s)?;
                }
            }
            ExperimentKind::Determinism => {
                if p.workers().iter().any(|&w| w == 0) {
                    return Err(invalid(&format!("{at}.params.workers"), "worker counts must be positive".into()));
                }
            }
            ExperimentKind::MaxPrinciple | ExperimentKind::L2Growth => {}
        }
        if self.kind != ExperimentKind::LinearDecay && self.data.is_empty() {
            return Err(invalid(&format!("{at}.data"), "at least one initial profile is required".into()));
        }
        Ok(())
    }
}

/// Corpus used when an entry lists no data.
pub fn default_data(kind: ExperimentKind) -> Vec<InitialData> {
    let smooth = |seed| InitialData::RandomSmooth {
        seed,
        max_mode: 8,
        amplitude: 1.0,
    };
    match kind {
        ExperimentKind::MaxPrinciple | ExperimentKind::L2Growth | ExperimentKind::NormProperties => {
            (0..20).map(smooth).collect()
        }
        ExperimentKind::Monotone2d => [(1.0, 0.5, 1), (2.0, 0.7, 2), (3.0, 0.3, 3), (0.5, 0.75, 1), (-1.5, 0.6, 2)]
            .into_iter()
            .map(|(slope, ripple, k)| InitialData::Monotone {
                slope,
                ripple,
                k,
                phase: 0.3,
            })
            .collect(),
        ExperimentKind::SmallSlope => (0..5)
            .map(|seed| InitialData::SmallSlope {
                seed,
                max_mode: 8,
                slope: 0.1,
            })
            .collect(),
        ExperimentKind::Smoothing => vec![InitialData::Kink {
            amplitude: 1.0,
            cells: 2.0,
        }],
        ExperimentKind::Stability | ExperimentKind::Determinism => vec![smooth(0)],
        ExperimentKind::Scaling => vec![InitialData::RandomSmooth {
            seed: 1,
            max_mode: 6,
            amplitude: 0.5,
        }],
        ExperimentKind::Continuation => vec![smooth(7)],
        ExperimentKind::QuadratureOrder => vec![InitialData::RandomSmooth {
            seed: 3,
            max_mode: 4,
            amplitude: 0.5,
        }],
        ExperimentKind::Decomposition => vec![
            InitialData::AbsSine {
                amplitude: 1.0,
                exponent: 1.5,
            },
            InitialData::AbsSine {
                amplitude: 1.0,
                exponent: 2.5,
            },
            InitialData::AbsSine {
                amplitude: 0.5,
                exponent: 3.0,
            },
            InitialData::Kink {
                amplitude: 1.0,
                cells: 2.0,
            },
        ],
        ExperimentKind::LinearDecay => Vec::new(),
    }
}

/// A whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    /// Worker budget for concurrent experiments; capped by `MUSKATLAB_THREADS`.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Calibration file, relative to the configuration file.
    #[serde(default)]
    pub calibration: Option<PathBuf>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentEntry>,
}

impl Document {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let doc: Document = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            HarnessError::Parse {
                origin: origin.to_string(),
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        doc.run.validate("run")?;
        doc.resolve()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut doc = Self::parse(&text, &path.display().to_string())?;
        if let Some(c) = &doc.calibration {
            if c.is_relative() {
                doc.calibration = Some(path.parent().unwrap_or(Path::new(".")).join(c));
            }
        }
        Ok(doc)
    }

    /// Merge every entry with the base run and validate it.
    pub fn resolve(&self) -> Result<Vec<ExperimentSpec>> {
        let mut out: Vec<ExperimentSpec> = Vec::new();
        for (i, e) in self.experiments.iter().enumerate() {
            let at = format!("experiment[{i}]");
            let name = e.name.clone().unwrap_or_else(|| format!("{}_{i}", e.kind.id()));
            if out.iter().any(|s| s.name == name) {
                return Err(invalid(&format!("{at}.name"), format!("duplicate experiment name '{name}'")));
            }
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return Err(invalid(&format!("{at}.name"), format!("'{name}' is not usable as a directory name")));
            }
            let spec = ExperimentSpec {
                name,
                kind: e.kind,
                run: e.run.apply(&self.run),
                data: match (&self.initial, e.data.is_empty()) {
                    (_, false) => e.data.clone(),
                    (Some(d), true) if e.kind != ExperimentKind::LinearDecay => vec![d.clone()],
                    _ => default_data(e.kind),
                },
                params: e.params.clone(),
            };
            spec.validate(&at)?;
            out.push(spec);
        }
        Ok(out)
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

fn invalid(field: &str, message: String) -> HarnessError {
    HarnessError::Invalid {
        field: field.to_string(),
        message,
    }
}

/// The battery that exercises every acceptance check on `d = 1`, `N = 256`.
pub const DEFAULT_BATTERY: &str = include_str!("../configs/default_battery.toml");
