//! Norms, seminorms and scalar diagnostics of sampled fields.
//!
//! Unless stated otherwise a norm acts on the periodic part of a field; the
//! affine part only enters gradients and difference quotients.

mod checks;
mod triebel;

pub use checks::{
    embedding_ratio, gn_ratio, lemma_cm_bounds, lemma_cm_check, log_interpolation_check, CmReport,
    InterpolationReport,
};
pub use triebel::triebel_seminorm;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::params::RegParams;
use crate::quadrature::QuadratureSpec;
use crate::singular::SingularIntegral;
use crate::spectral;
use crate::summation::CompensatedSum;

/// `(h^d sum p^2)^{1/2}`.
pub fn l2(f: &InterfaceField) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in f.values() {
        acc.add(v * v);
    }
    (acc.value() * f.grid().cell_volume()).sqrt()
}

pub fn linf(f: &InterfaceField) -> f64 {
    f.max_abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipNorm {
    /// `max |partial_j f|` per direction.
    pub components: Vec<f64>,
    /// `max |grad f|`.
    pub aggregate: f64,
}

pub fn lip(f: &InterfaceField) -> Result<LipNorm> {
    let grad = f.gradient()?;
    let components = grad.iter().map(InterfaceField::max_abs).collect();
    let aggregate = (0..f.grid().len())
        .map(|i| grad.iter().map(|g| g.values()[i].powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(LipNorm {
        components,
        aggregate,
    })
}

/// Signed extrema of one derivative `partial_j F_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionExtrema {
    /// `M_j = sup partial_j F_1`.
    pub upper: f64,
    pub argmax: usize,
    /// `m_j = sup (-partial_j F_1)`.
    pub lower: f64,
    pub argmin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipExtrema {
    pub directions: Vec<DirectionExtrema>,
    /// `A = sum_j (|M_j| + |m_j|)`.
    pub a: f64,
}

pub fn lip_extrema(f1: &InterfaceField) -> Result<LipExtrema> {
    let grad = f1.gradient()?;
    let directions: Vec<DirectionExtrema> = grad
        .iter()
        .map(|g| {
            let (argmax, upper) = g.argmax();
            let (argmin, min) = g.argmin();
            DirectionExtrema {
                upper,
                argmax,
                lower: -min,
                argmin,
            }
        })
        .collect();
    let a = directions.iter().map(|e| e.upper.abs() + e.lower.abs()).sum();
    Ok(LipExtrema { directions, a })
}

/// `B_j` at the maximizer of `partial_j F_1`, with the node set of the
/// regularized right-hand side.
pub fn bj_diagnostic(
    f1: &InterfaceField,
    f: &InterfaceField,
    params: &RegParams,
    quad: QuadratureSpec,
    j: usize,
) -> Result<f64> {
    f1.ensure_same_grid(f)?;
    let ev = SingularIntegral::regularized(*f.grid(), params, quad)?;
    bj_with(&ev, f1, f, j)
}

/// [`bj_diagnostic`] with a prebuilt evaluator.
pub fn bj_with(ev: &SingularIntegral, f1: &InterfaceField, f: &InterfaceField, j: usize) -> Result<f64> {
    if j >= f1.grid().dim() {
        return Err(MuskatError::InvalidParameter(format!(
            "direction {j} out of range for d = {}",
            f1.grid().dim()
        )));
    }
    let u = f1.gradient()?.swap_remove(j);
    let (point, _) = u.argmax();
    ev.slope_weighted_at(&u, f, point)
}

/// `(sum |xi|^{2s} |g_hat|^2)^{1/2}` in the continuous normalization.
pub fn sobolev_seminorm(g: &InterfaceField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "Sobolev index must be nonnegative, got {s}"
        )));
    }
    let grid = *g.grid();
    let e = spectral::spectral_energy(&grid, g.spectrum(), |k| {
        let xi = grid.wavevector(k);
        xi[0].hypot(xi[1]).powf(2.0 * s)
    });
    Ok(e.sqrt())
}

/// `(||f||_2^2 + ||f||_{H^s dot}^2)^{1/2}`.
pub fn smooth_norm(f: &InterfaceField, s_star: f64) -> Result<f64> {
    let l = l2(f);
    let h = sobolev_seminorm(f, s_star)?;
    Ok((l * l + h * h).sqrt())
}

fn check_holder_index(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "Holder index must lie in (0, 1), got {s}"
        )));
    }
    Ok(())
}

/// Exact discrete `sup |delta_alpha g(x)| / |alpha|^s` over all grid points
/// and all lattice offsets with `0 < |alpha| <= L/2`. Components are
/// combined in the Euclidean norm.
pub fn holder_vector(components: &[InterfaceField], s: f64) -> Result<f64> {
    check_holder_index(s)?;
    let first = components
        .first()
        .ok_or_else(|| MuskatError::InvalidParameter("no components".into()))?;
    for c in components {
        first.ensure_same_grid(c)?;
    }
    let grid = *first.grid();
    let h = grid.spacing();
    let half = (grid.n() / 2) as i64;
    let limit = 0.5 * grid.period() * (1.0 + 1e-12);
    let mut offsets = Vec::new();
    let lo = if grid.dim() == 1 { 0 } else { -half };
    for i in 0..=half {
        for j in lo..=half {
            if grid.dim() == 1 && j != 0 {
                continue;
            }
            if i == 0 && j <= 0 {
                continue;
            }
            let r = (i as f64 * h).hypot(j as f64 * h);
            if r <= limit {
                offsets.push(([i, j], r.powf(s), [i as f64 * h, j as f64 * h]));
            }
        }
    }
    let best = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut best = 0.0_f64;
            for &(off, rs, disp) in &offsets {
                let y = grid.offset_index(x, off);
                let mut sq = 0.0;
                for c in components {
                    let a = c.slope();
                    let d = c.values()[x] - c.values()[y] + a[0] * disp[0] + a[1] * disp[1];
                    sq += d * d;
                }
                best = best.max(sq.sqrt() / rs);
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

pub fn holder_seminorm(g: &InterfaceField, s: f64) -> Result<f64> {
    holder_vector(std::slice::from_ref(g), s)
}

/// `||grad g||_{C^s dot}`, which is `||g||_{C^{1+s} dot}`.
pub fn gradient_holder_seminorm(g: &InterfaceField, s: f64) -> Result<f64> {
    holder_vector(&g.gradient()?, s)
}

/// `t ||grad f(t)||_{C^{1/2} dot}`.
pub fn smoothing_statistic(f: &InterfaceField, t: f64) -> Result<f64> {
    Ok(t * gradient_holder_seminorm(f, 0.5)?)
}

/// What to include in a [`NormReport`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    #[serde(default)]
    pub sobolev: Vec<f64>,
    /// Holder indices applied to `f`.
    #[serde(default)]
    pub holder: Vec<f64>,
    /// Holder indices applied to `grad f`.
    #[serde(default)]
    pub gradient_holder: Vec<f64>,
    /// `(s, p, q)`; `q = inf` selects the sup form.
    #[serde(default)]
    pub triebel: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub lip: LipNorm,
    pub sobolev: Vec<(f64, f64)>,
    pub holder: Vec<(f64, f64)>,
    /// `(s, ||grad f||_{C^s dot})`; the entry at `s = 1/2` is `||f||_{C^{3/2} dot}`.
    pub gradient_holder: Vec<(f64, f64)>,
    pub triebel: Vec<((f64, f64, f64), f64)>,
}

impl NormReport {
    pub fn compute(f: &InterfaceField, request: &NormRequest, t: f64) -> Result<Self> {
        Ok(Self {
            t,
            l2: l2(f),
            linf: linf(f),
            lip: lip(f)?,
            sobolev: request
                .sobolev
                .iter()
                .map(|&s| Ok((s, sobolev_seminorm(f, s)?)))
                .collect::<Result<_>>()?,
            holder: request
                .holder
                .iter()
                .map(|&s| Ok((s, holder_seminorm(f, s)?)))
                .collect::<Result<_>>()?,
            gradient_holder: request
                .gradient_holder
                .iter()
                .map(|&s| Ok((s, gradient_holder_seminorm(f, s)?)))
                .collect::<Result<_>>()?,
            triebel: request
                .triebel
                .iter()
                .map(|&(s, p, q)| Ok(((s, p, q), triebel_seminorm(f, s, p, q)?)))
                .collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, 2.0 * PI, n).unwrap()
    }

    #[test]
    fn single_mode_values() {
        let g = grid1(64);
        let f = InterfaceField::from_fn(g, |x| (3.0 * x[0]).cos()).unwrap();
        assert!((l2(&f) - PI.sqrt()).abs() < 1e-12);
        assert!((sobolev_seminorm(&f, 0.0).unwrap() - l2(&f)).abs() < 1e-12);
        let s = 0.7;
        assert!((sobolev_seminorm(&f, s).unwrap() - 3f64.powf(s) * PI.sqrt()).abs() < 1e-11);
        let expected = (PI + PI * 3f64.powf(4.0)).sqrt();
        assert!((smooth_norm(&f, 2.0).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn lip_extrema_of_a_sine() {
        let g = GridSpec::new(1, 3.0, 64).unwrap();
        let f = InterfaceField::from_fn(g, |x| (2.0 * PI * x[0] / 3.0).sin()).unwrap();
        let e = lip_extrema(&f).unwrap();
        let k = 2.0 * PI / 3.0;
        assert!((e.directions[0].upper - k).abs() < 1e-10);
        assert!((e.directions[0].lower - k).abs() < 1e-10);
        assert_eq!(e.directions[0].argmax, 0);
        assert_eq!(e.directions[0].argmin, 32);
        assert!((e.a - 2.0 * k).abs() < 1e-10);
    }

    #[test]
    fn holder_vanishes_on_constants_and_sees_affine_parts() {
        let g = grid1(32);
        let c = InterfaceField::constant(g, 4.0).unwrap();
        assert_eq!(holder_seminorm(&c, 0.5).unwrap(), 0.0);
        let a = c.with_slope([2.0, 0.0]).unwrap();
        let hmax = 2.0 * PI.powf(0.5);
        assert!((holder_seminorm(&a, 0.5).unwrap() - hmax).abs() < 1e-12);
        assert!(holder_seminorm(&a, 1.5).is_err());
    }
}
