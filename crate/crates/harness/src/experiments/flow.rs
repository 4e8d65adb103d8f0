use muskat_core::initial::{cosine, InitialData};
use muskat_core::norms::{l2, lip};
use muskat_core::{linear_constant, InterfaceField, Probe};
use serde_json::json;

use super::{column, excess_over_slack, run_profile, Recorder};
use crate::config::ExperimentSpec;
use crate::error::Result;

pub fn max_principle(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let d = grid.dim() as f64;
    let factor = spec.params.slack_factor();
    let probes = [Probe::Max, Probe::Min, Probe::RhsSup, Probe::Linf];
    let (mut worst_max, mut worst_min) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut interp = 0.0_f64;
    let mut completed = 0usize;
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        let r = run_profile(spec, &f0, &probes)?;
        let ok = rec.absorb(&format!("data_{j}"), &r);
        let s = &r.series;
        let (dt, bound) = (column(s, "dt")?, column(s, "rhs_sup")?);
        let mx = column(s, "max")?;
        let mn: Vec<f64> = column(s, "min")?.iter().map(|v| -v).collect();
        worst_max = worst_max.max(excess_over_slack(&mx, &dt, &bound, factor));
        worst_min = worst_min.max(excess_over_slack(&mn, &dt, &bound, factor));
        // ||f||_inf against ||f0||_2^{2/(d+2)} ||grad f0||_inf^{d/(d+2)}
        let scale = l2(&f0).powf(2.0 / (d + 2.0)) * lip(&f0)?.aggregate.powf(d / (d + 2.0));
        let peak = column(s, "linf")?.into_iter().fold(0.0, f64::max);
        if scale > 0.0 {
            interp = interp.max(peak / scale);
        }
        completed += ok as usize;
        rec.series(format!("data_{j}"), r.series.clone());
        rec.snapshot(format!("final_{j}"), r.final_state.f);
    }
    rec.stat("linf_interpolation_ratio", interp);
    rec.stat("completed_runs", completed as f64);
    rec.hard("max_nonincreasing", worst_max <= 0.0, worst_max, 0.0);
    rec.hard("min_nondecreasing", worst_min <= 0.0, worst_min, 0.0);
    Ok(())
}

pub fn l2_growth(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let armed = spec.run.params().l2_assertion_armed();
    let mut worst = 0.0_f64;
    let mut growth = 0.0_f64;
    let mut nonincreasing = true;
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        let r = run_profile(spec, &f0, &[Probe::L2])?;
        rec.absorb(&format!("data_{j}"), &r);
        let t = column(&r.series, "t")?;
        let n2 = column(&r.series, "l2")?;
        let base = n2[0];
        for i in 0..n2.len() {
            let ratio = if n2[i] == 0.0 { 0.0 } else { n2[i] / (t[i].exp() * base) };
            worst = worst.max(ratio);
            if base > 0.0 {
                growth = growth.max(n2[i] / base);
            }
            if i > 0 && n2[i] > n2[i - 1] {
                nonincreasing = false;
            }
        }
        rec.series(format!("data_{j}"), r.series.clone());
    }
    rec.stat("max_l2_growth", growth);
    rec.record("l2_nonincreasing", json!(nonincreasing));
    let threshold = 1.0 + 1e-6;
    if armed {
        rec.hard("l2_bound", worst <= threshold, worst, threshold);
    } else {
        rec.note("mu2 exceeds (mu1/2)^{3/2}; the L2 bound is not asserted");
        rec.report("l2_bound", worst, threshold);
    }
    Ok(())
}

/// `||f_x||_inf` non-increasing within slack on every profile; returns the
/// worst excess and the per-profile series.
fn lipschitz_decay(
    spec: &ExperimentSpec,
    rec: &mut Recorder,
    data: &[(String, InterfaceField)],
) -> Result<(f64, Vec<muskat_core::DiagnosticsSeries>)> {
    let factor = spec.params.slack_factor();
    let probes = [Probe::Lip, Probe::RhsLip, Probe::DerivMin, Probe::DerivMax];
    let mut worst = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for (label, f0) in data {
        let r = run_profile(spec, f0, &probes)?;
        rec.absorb(label, &r);
        let s = &r.series;
        let e = excess_over_slack(&column(s, "lip")?, &column(s, "dt")?, &column(s, "rhs_lip")?, factor);
        worst = worst.max(e);
        out.push(r.series);
    }
    Ok((worst, out))
}

pub fn monotone(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let data: Vec<(String, InterfaceField)> = spec
        .data
        .iter()
        .enumerate()
        .map(|(j, d)| Ok((format!("data_{j}"), d.build(grid)?)))
        .collect::<Result<_>>()?;
    let (worst, series) = lipschitz_decay(spec, rec, &data)?;
    let mut preserved = true;
    for ((label, f0), s) in data.iter().zip(series) {
        let g = f0.gradient()?.remove(0);
        let increasing = g.argmax().1 >= -g.argmin().1;
        let ok = if increasing {
            column(&s, "deriv_min")?.iter().all(|&v| v >= 0.0)
        } else {
            column(&s, "deriv_max")?.iter().all(|&v| v <= 0.0)
        };
        preserved &= ok;
        rec.series(label.clone(), s);
    }
    rec.record("monotonicity_preserved", json!(preserved));
    rec.hard("lip_nonincreasing", worst <= 0.0, worst, 0.0);
    Ok(())
}

pub fn small_slope(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let data: Vec<(String, InterfaceField)> = spec
        .data
        .iter()
        .enumerate()
        .map(|(j, d)| Ok((format!("data_{j}"), d.build(grid)?)))
        .collect::<Result<_>>()?;
    let (worst, series) = lipschitz_decay(spec, rec, &data)?;
    let c = linear_constant(grid.dim())?;
    let k0 = 2.0 * std::f64::consts::PI / grid.period();
    for ((label, _), (s, d)) in data.iter().zip(series.into_iter().zip(&spec.data)) {
        if let InitialData::Cosine { k, .. } = d {
            let t = column(&s, "t")?;
            let l = column(&s, "lip")?;
            let (tn, ln) = (t[t.len() - 1], l[l.len() - 1]);
            if tn > 0.0 && ln > 0.0 {
                let kk = k * k0;
                rec.stat(format!("{label}_lip_decay_rate"), (l[0] / ln).ln() / tn);
                rec.stat(format!("{label}_linear_rate"), c * kk + spec.run.mu1 * kk * kk);
            }
        }
        rec.series(label.clone(), s);
    }
    rec.hard("lip_nonincreasing", worst <= 0.0, worst, 0.0);
    let sweep = spec.params.sweep();
    if !sweep.is_empty() {
        let mut largest = 0.0_f64;
        for eps in sweep {
            let f0 = cosine(grid, 1.0, eps)?;
            let (w, _) = lipschitz_decay(spec, rec, &[(format!("sweep_{eps}"), f0)])?;
            if w <= 0.0 {
                largest = largest.max(eps);
            }
        }
        rec.stat("sweep_largest_passing", largest);
    }
    Ok(())
}
