use muskat_core::{InterfaceField, Probe};

use super::{column, run_profile, Recorder};
use crate::config::ExperimentSpec;
use crate::error::Result;

const PROBES: [Probe; 3] = [Probe::Smoothing, Probe::Lip, Probe::GradHolder { s: 0.5 }];

/// `sup t ||grad f(t)||_{C^{1/2}}` over probe times inside `window`.
fn window_sup(
    spec: &ExperimentSpec,
    rec: &mut Recorder,
    label: &str,
    f0: &InterfaceField,
    window: [f64; 2],
) -> Result<f64> {
    let r = run_profile(spec, f0, &PROBES)?;
    rec.absorb(label, &r);
    let t = column(&r.series, "t")?;
    let s = column(&r.series, "smoothing")?;
    let sup = t
        .iter()
        .zip(&s)
        .filter(|(t, _)| **t >= window[0] * (1.0 - 1e-12) && **t <= window[1] * (1.0 + 1e-12))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    rec.series(label, r.series.clone());
    rec.snapshot(format!("{label}_final"), r.final_state.f);
    Ok(sup)
}

pub fn smoothing(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let window = spec.params.window.unwrap_or([1e-3, spec.run.t_final]);
    let tol = spec.params.refinement_tolerance();
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        let sup = window_sup(spec, rec, &format!("data_{j}"), &f0, window)?;
        rec.stat(format!("data_{j}_sup"), sup);
        rec.hard(format!("data_{j}_finite"), sup.is_finite(), sup, f64::MAX);
        if spec.params.refine() {
            let mut fine = spec.clone();
            fine.run.n *= 2;
            // rebuilt, not interpolated: grid-tied mollification gets sharper
            let f0 = data.build(fine.run.grid()?)?;
            let sup2 = window_sup(&fine, rec, &format!("data_{j}_refined"), &f0, window)?;
            let change = if sup == 0.0 { 0.0 } else { (sup2 - sup).abs() / sup };
            rec.stat(format!("data_{j}_refined_sup"), sup2);
            rec.hard(format!("data_{j}_refinement"), change < tol, change, tol);
        }
    }
    Ok(())
}
