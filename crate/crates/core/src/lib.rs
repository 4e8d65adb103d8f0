//! Numerical laboratory for the Muskat equation in graph form.

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod cutoff;
pub mod decompose;
pub mod error;
pub mod field;
pub mod grid;
pub mod initial;
pub mod io;
pub mod norms;
pub mod parallel;
pub mod params;
pub mod quadrature;
pub mod singular;
pub mod spectral;
pub mod stepper;
pub mod summation;

pub use cutoff::CutoffProfile;
pub use error::{MuskatError, Result};
pub use field::InterfaceField;
pub use grid::GridSpec;
pub use params::RegParams;
pub use quadrature::{NodePlan, QuadratureSpec, TailMode};
pub use singular::{
    e_alpha, finite_difference_slope, linear_constant, rhs_exact, rhs_general, rhs_regularized,
    SingularIntegral,
};
pub use decompose::{decompose, Decomposition};
pub use stepper::{
    continuation, run, run_decomposed, semigroup_oracle, DiagnosticsSeries, Probe, ProbeSchedule,
    RhsMode, RunResult, Scheme, Solver, SolverConfig, SolverState, StepControl,
};
