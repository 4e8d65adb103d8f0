use std::collections::BTreeMap;

use muskat_core::initial::bump;
use muskat_core::norms::{l2, linf, lip};
use muskat_core::{semigroup_oracle, DiagnosticsSeries, InterfaceField, Solver};
use rayon::prelude::*;
use serde_json::json;

use super::{max_gap, on_grid, planned_dt, strided_values, trajectory, Recorder};
use crate::config::ExperimentSpec;
use crate::error::Result;

pub fn stability(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let cfg = spec.run.solver_config();
    let solver = Solver::new(grid, cfg.clone())?;
    let dt = planned_dt(&solver);
    let times = cfg.probes.times(spec.run.t_final)?;
    let deltas = spec.params.deltas();
    let pert = bump(grid, spec.params.bump_amplitude(), spec.params.bump_width())?;
    let (mut gain_max, mut spread_max) = (0.0_f64, 0.0_f64);
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        let starts: Vec<InterfaceField> = std::iter::once(Ok(f0.clone()))
            .chain(deltas.iter().map(|&d| f0.axpy(d, &pert)))
            .collect::<std::result::Result<_, _>>()?;
        let runs: Vec<(Vec<InterfaceField>, u64)> = starts
            .par_iter()
            .map(|s| trajectory(&solver, s, dt, &times))
            .collect::<Result<_>>()?;
        for (_, steps) in &runs {
            rec.count_steps(*steps, solver.node_count());
        }
        let base = &runs[0].0;
        let mut cols = vec!["t".to_string()];
        cols.extend(deltas.iter().map(|d| format!("gain_{d}")));
        let mut series = DiagnosticsSeries::new(cols);
        let mut last = Vec::new();
        for (i, &t) in times.iter().enumerate() {
            let mut row = vec![t];
            for (k, &d) in deltas.iter().enumerate() {
                let diff = runs[k + 1].0[i].sub(&base[i])?.max_abs();
                row.push(if d == 0.0 { 0.0 } else { diff / d });
            }
            let g: Vec<f64> = deltas
                .iter()
                .zip(&row[1..])
                .filter(|(d, _)| **d > 0.0)
                .map(|(_, g)| *g)
                .collect();
            let hi = g.iter().copied().fold(0.0, f64::max);
            let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
            if hi > 0.0 {
                spread_max = spread_max.max((hi - lo) / hi);
            }
            last = row.clone();
            series.push(row);
        }
        gain_max = gain_max.max(last[1..].iter().copied().fold(0.0, f64::max));
        series.metadata.push(("data".into(), format!("{data:?}")));
        rec.series(format!("gain_{j}"), series);
    }
    rec.stat("gain_at_final_time", gain_max);
    rec.stat("delta_spread", spread_max);
    let tol = spec.params.delta_tolerance();
    if deltas.iter().filter(|d| **d > 0.0).count() >= 2 {
        rec.hard("delta_independence", spread_max <= tol, spread_max, tol);
    }
    let mut context = BTreeMap::new();
    if let Some(data) = spec.data.first() {
        let f0 = data.build(grid)?;
        context.insert("base_lip".into(), lip(&f0)?.aggregate.to_string());
        context.insert("base_l2".into(), l2(&f0).to_string());
        context.insert("base_linf".into(), linf(&f0).to_string());
    }
    let p = spec.run.params();
    context.insert("mu1".into(), p.mu1.to_string());
    context.insert("mu2".into(), p.mu2.to_string());
    context.insert("n".into(), spec.run.n.to_string());
    context.insert("t_final".into(), spec.run.t_final.to_string());
    context.insert("bump_width".into(), spec.params.bump_width().to_string());
    let key = rec.calibration_key("stability_gain", None);
    rec.calibrated("gain_bound", key, gain_max, spec.data.len() * deltas.len(), context);
    Ok(())
}

pub fn scaling(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let lambda = spec.params.lambda();
    let grid = spec.run.grid()?;
    let cfg = spec.run.solver_config();
    let solver = Solver::new(grid, cfg.clone())?;
    let dt = planned_dt(&solver);
    let times = cfg.probes.times(spec.run.t_final)?;

    let small = grid.rescaled(lambda)?;
    let mut scfg = cfg.clone();
    scfg.params.mu1 /= lambda;
    scfg.params.mu2 /= lambda;
    let ssolver = Solver::new(small, scfg)?;
    let stimes: Vec<f64> = times.iter().map(|t| t / lambda).collect();

    let fine = grid.refined()?;
    let fsolver = Solver::new(fine, cfg)?;

    let (mut corr, mut selfconv, mut oracle) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut series = DiagnosticsSeries::new(vec![
        "t".into(),
        "correspondence".into(),
        "self_convergence".into(),
    ]);
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        let g0 = on_grid(&f0.map(|v| v / lambda)?, small)?;
        let h0 = f0.upsample(fine.n())?;
        let (a, (b, c)) = rayon::join(
            || trajectory(&solver, &f0, dt, &times),
            || {
                rayon::join(
                    || trajectory(&ssolver, &g0, dt / lambda, &stimes),
                    || trajectory(&fsolver, &h0, dt / 2.0, &times),
                )
            },
        );
        let ((base, s1), (scaled, s2), (refined, s3)) = (a?, b?, c?);
        rec.count_steps(s1 + s2 + s3, solver.node_count());
        for (i, &t) in times.iter().enumerate() {
            let back: Vec<f64> = scaled[i].values().iter().map(|v| lambda * v).collect();
            let c = max_gap(&back, base[i].values());
            let e = max_gap(&strided_values(&refined[i], 2), base[i].values());
            corr = corr.max(c);
            selfconv = selfconv.max(e);
            if j == 0 {
                series.push(vec![t, c, e]);
            }
            let lin = semigroup_oracle(&f0, t, spec.run.mu1)?;
            let slin = semigroup_oracle(&g0, t / lambda, spec.run.mu1 / lambda)?;
            let back: Vec<f64> = slin.values().iter().map(|v| lambda * v).collect();
            oracle = oracle.max(max_gap(&back, lin.values()));
        }
    }
    rec.series("correspondence", series);
    rec.stat("lambda", lambda);
    rec.stat("correspondence_error", corr);
    rec.stat("self_convergence_error", selfconv);
    rec.stat("oracle_error", oracle);
    rec.hard("correspondence", corr <= 2.0 * selfconv, corr, 2.0 * selfconv);
    let tol = spec.params.oracle_tolerance();
    rec.hard("oracle_correspondence", oracle <= tol, oracle, tol);
    Ok(())
}

pub fn continuation(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let f0 = spec.data[0].build(grid)?;
    let schedule = spec.params.schedule();
    let report = muskat_core::continuation(&f0, &spec.run.solver_config(), &schedule, spec.params.with_exact())?;
    for e in &report.entries {
        rec.count_steps(e.steps, 0);
    }
    let mut series = DiagnosticsSeries::new(vec![
        "index".into(),
        "mu1".into(),
        "mu2".into(),
        "difference".into(),
    ]);
    for (i, d) in report.differences.iter().enumerate() {
        let (mu1, mu2) = schedule[i + 1];
        series.push(vec![(i + 1) as f64, mu1, mu2, *d]);
    }
    rec.series("cauchy", series);
    rec.stat("dt", report.dt);
    for f in &report.flags {
        rec.note(f.clone());
    }
    rec.record("report", json!(report));
    let min_shrink = spec.params.min_shrink();
    if let Some(s) = report.mu2_shrink_min() {
        rec.hard("mu2_shrink", s >= min_shrink, s, min_shrink);
    }
    if let (Some(gap), Some(last)) = (report.exact_gap, report.differences.last()) {
        rec.hard("exact_gap", gap < 2.0 * last, gap, 2.0 * last);
    }
    rec.report(
        "differences_monotone",
        if report.monotone { 0.0 } else { 1.0 },
        0.0,
    );
    Ok(())
}
