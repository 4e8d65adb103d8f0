use std::f64::consts::PI;

use muskat_core::decompose::{decompose, sigma_sweep};
use muskat_core::initial::cosine;
use muskat_core::parallel::with_workers;
use muskat_core::{linear_constant, rhs_regularized, GridSpec, InterfaceField, Probe};
use serde_json::json;

use super::{column, max_gap, run_profile, strided_values, Recorder};
use crate::config::ExperimentSpec;
use crate::error::Result;

pub fn linear_decay(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let c = linear_constant(grid.dim())?;
    let tol = spec.params.rate_tolerance();
    let mut worst = 0.0_f64;
    for k in spec.params.modes() {
        let f0 = cosine(grid, k as f64, spec.params.amplitude())?;
        let r = run_profile(spec, &f0, &[Probe::Mode { k: [k, 0] }])?;
        rec.absorb(&format!("mode_{k}"), &r);
        let t = column(&r.series, "t")?;
        let a = column(&r.series, &format!("mode_{k}"))?;
        let (tn, an) = (t[t.len() - 1], a[a.len() - 1]);
        let kappa = 2.0 * PI * k as f64 / grid.period();
        let predicted = c * kappa + spec.run.mu1 * kappa * kappa;
        let measured = (a[0] / an).ln() / tn;
        let err = (measured - predicted).abs() / predicted;
        rec.stat(format!("mode_{k}_rate"), measured);
        rec.stat(format!("mode_{k}_predicted"), predicted);
        worst = worst.max(err);
        rec.series(format!("mode_{k}"), r.series);
    }
    rec.stat("linear_constant", c);
    rec.hard("rate_relative_error", worst <= tol, worst, tol);
    Ok(())
}

pub fn quadrature_order(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let levels = spec.params.levels();
    let base = spec.run.grid()?;
    let finest = GridSpec::new(base.dim(), base.period(), base.n() << (levels - 1))?;
    let params = spec.run.params();
    let quad = spec.run.quad();
    let [lo, hi] = spec.params.ratio_band();
    for (j, data) in spec.data.iter().enumerate() {
        // built once on the finest grid: some generators normalize per grid
        let top = data.build(finest)?;
        let rhs: Vec<Vec<f64>> = (0..levels)
            .map(|l| {
                let stride = 1 << (levels - 1 - l);
                let g = GridSpec::new(base.dim(), base.period(), base.n() << l)?;
                let f = InterfaceField::new(g, strided_values(&top, stride))?.with_slope(top.slope())?;
                let r = rhs_regularized(&f, &params, quad)?;
                Ok(strided_values(&r, 1 << l))
            })
            .collect::<Result<_>>()?;
        let diffs: Vec<f64> = rhs.windows(2).map(|w| max_gap(&w[0], &w[1])).collect();
        let ratios: Vec<f64> = diffs.windows(2).map(|w| w[0] / w[1]).collect();
        rec.record(format!("data_{j}_differences"), json!(diffs));
        rec.record(format!("data_{j}_ratios"), json!(ratios));
        for (i, r) in ratios.iter().enumerate() {
            rec.stat(format!("data_{j}_ratio_{i}"), *r);
            let pass = *r >= lo && *r <= hi;
            rec.hard(format!("data_{j}_richardson_{i}"), pass, *r, if *r < lo { lo } else { hi });
        }
    }
    Ok(())
}

pub fn decomposition(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let s_star = spec.params.s_star(grid.dim());
    let (mut over, mut recon, mut rise, mut drop) = (f64::NEG_INFINITY, 0.0_f64, 0.0_f64, 0.0_f64);
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        for sigma in spec.params.sigmas() {
            let d = decompose(&f0, sigma, s_star)?;
            over = over.max(d.sigma_achieved - sigma);
            recon = recon.max(d.rough.add(&d.smooth)?.sub(&f0)?.max_abs());
            rec.stat(format!("data_{j}_sigma_{sigma}_k"), d.cutoff_k as f64);
            rec.stat(format!("data_{j}_sigma_{sigma}_smooth_norm"), d.smooth_norm);
        }
        let sweep = sigma_sweep(&f0, s_star)?;
        for w in sweep.windows(2) {
            let scale = w[0].sigma.max(1.0);
            rise = rise.max((w[1].sigma - w[0].sigma) / scale);
            let scale = w[1].smooth_norm.max(1.0);
            drop = drop.max((w[0].smooth_norm - w[1].smooth_norm) / scale);
        }
        rec.record(format!("data_{j}_sweep"), json!(sweep));
    }
    rec.hard("sigma_achieved", over <= 0.0, over, 0.0);
    rec.hard("reconstruction", recon <= 1e-12, recon, 1e-12);
    rec.hard("sigma_nonincreasing", rise <= 1e-12, rise, 1e-12);
    rec.hard("smooth_norm_nondecreasing", drop <= 1e-12, drop, 1e-12);
    Ok(())
}

pub fn determinism(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let probes = [Probe::L2, Probe::Lip, Probe::Max, Probe::RhsSup];
    let mut mismatches = 0usize;
    for (j, data) in spec.data.iter().enumerate() {
        let f0 = data.build(grid)?;
        let mut reference: Option<(Vec<u64>, Vec<u64>)> = None;
        for w in spec.params.workers() {
            let r = with_workers(w, || run_profile(spec, &f0, &probes))??;
            rec.absorb(&format!("data_{j}_workers_{w}"), &r);
            let rows: Vec<u64> = r.series.rows.iter().flatten().map(|v| v.to_bits()).collect();
            let fin: Vec<u64> = r.final_state.f.values().iter().map(|v| v.to_bits()).collect();
            match &reference {
                None => reference = Some((rows, fin)),
                Some((a, b)) => {
                    if *a != rows || *b != fin {
                        mismatches += 1;
                        rec.note(format!("data_{j}: {w} workers differ from the first count"));
                    }
                }
            }
        }
    }
    rec.hard("bitwise_identical", mismatches == 0, mismatches as f64, 0.0);
    Ok(())
}
