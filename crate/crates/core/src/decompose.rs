//! Splitting of initial data into a small-slope rough part and a smooth part.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::norms::{lip, smooth_norm};

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub rough: InterfaceField,
    pub smooth: InterfaceField,
    pub sigma_requested: f64,
    /// `max |grad rough|`.
    pub sigma_achieved: f64,
    /// `||smooth||_{H^{s*}}`.
    pub smooth_norm: f64,
    pub s_star: f64,
    /// Integer frequency radius of the projection.
    pub cutoff_k: usize,
}

/// One entry of the dyadic radius sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub sigma: f64,
    pub smooth_norm: f64,
}

/// `K = 1, 2, 4, ..., N/2`.
pub fn dyadic_radii(n: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |k| Some(k * 2))
        .take_while(|&k| k <= n / 2)
        .collect()
}

/// Sharp projection onto `|k| <= radius`; the affine part stays with it.
pub fn split_at(f0: &InterfaceField, radius: usize) -> Result<(InterfaceField, InterfaceField)> {
    let smooth = f0.low_pass(radius as f64)?;
    let rough_values = f0
        .values()
        .iter()
        .zip(smooth.values())
        .map(|(a, b)| a - b)
        .collect();
    let rough = InterfaceField::new(*f0.grid(), rough_values)?;
    Ok((rough, smooth))
}

/// Tail slope and smooth norm for every dyadic radius.
pub fn sigma_sweep(f0: &InterfaceField, s_star: f64) -> Result<Vec<SweepEntry>> {
    dyadic_radii(f0.grid().n())
        .into_par_iter()
        .map(|k| {
            let (rough, smooth) = split_at(f0, k)?;
            Ok(SweepEntry {
                k,
                sigma: lip(&rough)?.aggregate,
                smooth_norm: smooth_norm(&smooth, s_star)?,
            })
        })
        .collect()
}

/// Smallest dyadic `K` whose high-frequency remainder has slope at most `sigma`.
pub fn decompose(f0: &InterfaceField, sigma: f64, s_star: f64) -> Result<Decomposition> {
    if !(sigma > 0.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let d = f0.grid().dim() as f64;
    if !(s_star >= 1.0 + d / 2.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "s_star must be at least 1 + d/2 = {}, got {s_star}",
            1.0 + d / 2.0
        )));
    }
    let sweep = sigma_sweep(f0, s_star)?;
    let Some(hit) = sweep.iter().find(|e| e.sigma <= sigma) else {
        let best = sweep
            .iter()
            .min_by(|a, b| a.sigma.total_cmp(&b.sigma))
            .expect("at least one radius");
        return Err(MuskatError::SigmaUnreachable {
            requested: sigma,
            best: best.sigma,
            k: best.k,
        });
    };
    let (rough, smooth) = split_at(f0, hit.k)?;
    Ok(Decomposition {
        rough,
        smooth,
        sigma_requested: sigma,
        sigma_achieved: hit.sigma,
        smooth_norm: hit.smooth_norm,
        s_star,
        cutoff_k: hit.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn band_limited_data_has_no_rough_part() {
        let g = GridSpec::new(1, 2.0 * PI, 64).unwrap();
        let f = InterfaceField::from_fn(g, |x| x[0].sin() + 0.2 * (3.0 * x[0]).cos()).unwrap();
        let dec = decompose(&f, 1e-6, 3.0).unwrap();
        assert_eq!(dec.cutoff_k, 4);
        assert!(dec.rough.max_abs() < 1e-13);
        let back = dec.rough.add(&dec.smooth).unwrap();
        let err = back.sub(&f).unwrap().max_abs();
        assert!(err <= 1e-12);
    }

    #[test]
    fn unreachable_sigma_reports_best() {
        let g = GridSpec::new(2, 1.0, 8).unwrap();
        // the mode (3, 3) lies outside every dyadic disk
        let f = InterfaceField::from_fn(g, |x| (6.0 * PI * x[0]).cos() * (6.0 * PI * x[1]).cos()).unwrap();
        match decompose(&f, 1e-3, 3.0) {
            Err(MuskatError::SigmaUnreachable { best, .. }) => assert!(best > 1.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(decompose(&f, 1e-3, 1.5).is_err());
    }
}
