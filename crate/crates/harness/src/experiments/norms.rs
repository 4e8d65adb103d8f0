use std::collections::BTreeMap;

use muskat_core::norms::{
    gn_ratio, lemma_cm_check, log_interpolation_check, sobolev_seminorm, triebel_seminorm,
};
use muskat_core::InterfaceField;
use rayon::prelude::*;
use serde_json::json;

use super::Recorder;
use crate::config::ExperimentSpec;
use crate::error::Result;

/// `(s0, s1, theta)` for the Sobolev interpolation check.
const SOBOLEV_TRIPLES: [[f64; 3]; 3] = [[0.5, 2.0, 0.5], [0.0, 1.5, 0.25], [1.0, 3.0, 0.75]];

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(0.0, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

pub fn norm_properties(spec: &ExperimentSpec, rec: &mut Recorder) -> Result<()> {
    let grid = spec.run.grid()?;
    let fields: Vec<InterfaceField> = spec
        .data
        .iter()
        .map(|d| Ok(d.build(grid)?))
        .collect::<Result<_>>()?;

    let ratios: Vec<f64> = fields
        .par_iter()
        .map(|g| Ok(triebel_seminorm(g, 0.5, 2.0, 2.0)? / sobolev_seminorm(g, 0.5)?))
        .collect::<Result<_>>()?;
    let sp = spread(&ratios);
    rec.record("triebel_sobolev_ratios", json!(ratios));
    let tol = spec.params.triebel_tolerance();
    rec.hard("triebel_sobolev_equivalence", sp <= tol, sp, tol);

    let mut interp = 0.0_f64;
    for g in &fields {
        for [s0, s1, theta] in SOBOLEV_TRIPLES {
            let s = (1.0 - theta) * s0 + theta * s1;
            let lhs = sobolev_seminorm(g, s)?;
            let rhs = sobolev_seminorm(g, s0)?.powf(1.0 - theta) * sobolev_seminorm(g, s1)?.powf(theta);
            if rhs > 0.0 {
                interp = interp.max(lhs / rhs - 1.0);
            }
        }
    }
    rec.hard("sobolev_interpolation", interp <= 1e-8, interp, 1e-8);

    let samples = spec.params.cm_samples();
    let seed = spec.params.seed();
    let cm = spec
        .params
        .cm_orders()
        .into_par_iter()
        .map(|m| Ok(lemma_cm_check(m, samples, seed)?))
        .collect::<Result<Vec<_>>>()?;
    for r in &cm {
        let worst = (r.max_ratio_first / r.bound_first).max(r.max_ratio_second / r.bound_second);
        rec.hard(format!("cm_lipschitz_{}", r.m), r.passed, worst, 1.0 + 1e-8);
    }
    rec.record("cm_reports", json!(cm));

    let log: Vec<f64> = fields
        .par_iter()
        .map(|g| Ok(log_interpolation_check(g)?.ratio))
        .collect::<Result<_>>()?;
    let worst = log.iter().copied().fold(0.0, f64::max);
    rec.record("log_interpolation_ratios", json!(log));
    let context = BTreeMap::from([
        ("grid".to_string(), grid.describe()),
        ("fields".to_string(), fields.len().to_string()),
    ]);
    let key = rec.calibration_key("log_interpolation", None);
    rec.calibrated("log_interpolation", key, worst, fields.len(), context.clone());

    for [s, theta, q] in spec.params.gn_family() {
        let r: Vec<f64> = fields
            .par_iter()
            .map(|g| Ok(gn_ratio(g, s, theta, q)?.ratio))
            .collect::<Result<_>>()?;
        let worst = r.iter().copied().fold(0.0, f64::max);
        let detail = format!("{s}_{theta}_{q}");
        let key = rec.calibration_key("gn", Some(&detail));
        rec.calibrated(&format!("gn_{detail}"), key, worst, fields.len(), context.clone());
    }
    Ok(())
}
