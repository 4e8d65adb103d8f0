//! Interpolation-type inequalities measured on sampled fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gradient_holder_seminorm, lip, linf, sobolev_seminorm, triebel_seminorm};
use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::quadrature::origin_directions;
use crate::summation::CompensatedSum;

/// Left side, right side and their ratio (0 when the left side vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl InterpolationReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self { lhs, rhs, ratio }
    }
}

/// `sup_x int_{|alpha| <= 1} |E_alpha g| dalpha / |alpha|^d` against
/// `||grad g||_inf log(2 + ||grad g||_{C^{1/2} dot}) + 1`.
///
/// The ball is clipped to `|alpha| <= L/2` on small tori.
pub fn log_interpolation_check(g: &InterfaceField) -> Result<InterpolationReport> {
    let grid = *g.grid();
    let d = grid.dim();
    let h = grid.spacing();
    let reach = 1.0_f64.min(0.5 * grid.period()) * (1.0 + 1e-12);
    let half = (grid.n() / 2) as i64;
    let (lo1, hi1) = if d == 1 { (0, 0) } else { (-half, half) };
    let mut offsets = Vec::new();
    for i in -half..=half {
        for j in lo1..=hi1 {
            if i == 0 && j == 0 {
                continue;
            }
            let disp = [i as f64 * h, j as f64 * h];
            let r = disp[0].hypot(disp[1]);
            if r <= reach {
                offsets.push(([i, j], r, [disp[0] / r, disp[1] / r]));
            }
        }
    }
    offsets.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let cell = grid.cell_volume();
    let grad: Vec<InterfaceField> = g.periodic_gradient()?;
    let hess = g.hessian()?;
    let rays = origin_directions(&grid);
    let p = g.values();
    let lhs = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut acc = CompensatedSum::new();
            for &(off, r, unit) in &offsets {
                let y = grid.offset_index(x, off);
                let mut dir = unit[0] * grad[0].values()[x];
                if d == 2 {
                    dir += unit[1] * grad[1].values()[x];
                }
                let e = dir - (p[x] - p[y]) / r;
                acc.add(cell * e.abs() / r.powi(d as i32));
            }
            for &(w, ang, len) in &rays {
                let q = if d == 1 {
                    w[0] * w[0] * hess[0].values()[x]
                } else {
                    w[0] * w[0] * hess[0].values()[x]
                        + 2.0 * w[0] * w[1] * hess[1].values()[x]
                        + w[1] * w[1] * hess[2].values()[x]
                };
                acc.add(ang * 0.5 * q.abs() * len);
            }
            acc.value()
        })
        .reduce(|| 0.0, f64::max);
    let lipschitz = lip(g)?.aggregate;
    let rhs = lipschitz * (2.0 + gradient_holder_seminorm(g, 0.5)?).ln() + 1.0;
    Ok(InterpolationReport::new(lhs, rhs))
}

/// `||g||_{F^{theta s}_{2/theta, q} dot}` against `||g||_{H^s dot}^theta ||g||_inf^{1-theta}`.
pub fn gn_ratio(g: &InterfaceField, s: f64, theta: f64, q: f64) -> Result<InterpolationReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    let lhs = triebel_seminorm(g, theta * s, 2.0 / theta, q)?;
    let rhs = sobolev_seminorm(g, s)?.powf(theta) * linf(g).powf(1.0 - theta);
    Ok(InterpolationReport::new(lhs, rhs))
}

/// `||g||_{F^s_{p,q} dot}` against `||g||_{H^r dot}` with `r = s - d/p + d/2`, `p > 2`.
pub fn embedding_ratio(g: &InterfaceField, s: f64, p: f64, q: f64) -> Result<InterpolationReport> {
    if !(p > 2.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "embedding needs p > 2, got {p}"
        )));
    }
    let d = g.grid().dim() as f64;
    let r = s - d / p + d / 2.0;
    let lhs = triebel_seminorm(g, s, p, q)?;
    let rhs = sobolev_seminorm(g, r)?;
    Ok(InterpolationReport::new(lhs, rhs))
}

/// Closed-form Lipschitz constants of `<z>^{-m}` and `z <z>^{-(m+3)}`.
pub fn lemma_cm_bounds(m: u32) -> (f64, f64) {
    let m = m as f64;
    let first = m / (m + 1.0).sqrt() * ((m + 2.0) / (m + 1.0)).powf(-(m + 2.0) / 2.0);
    let trough = 2.0 * ((m + 2.0) / (m + 5.0)).powf((m + 5.0) / 2.0);
    (first, trough.max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmReport {
    pub m: u32,
    pub samples: usize,
    pub max_ratio_first: f64,
    pub bound_first: f64,
    pub max_ratio_second: f64,
    pub bound_second: f64,
    /// Ratio of the summed left side to `|a - b|`.
    pub max_ratio_sum: f64,
    pub passed: bool,
}

fn bracket(z: f64) -> f64 {
    1.0_f64.hypot(z)
}

/// Empirical Lipschitz constants of both functions over random pairs.
pub fn lemma_cm_check(m: u32, samples: usize, seed: u64) -> Result<CmReport> {
    if m == 0 {
        return Err(MuskatError::InvalidParameter("m must be at least 1".into()));
    }
    let mi = m as i32;
    let first = |z: f64| bracket(z).powi(-mi);
    let second = |z: f64| z * bracket(z).powi(-(mi + 3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64).wrapping_mul(0x9e37_79b9));
    let (b1, b2) = lemma_cm_bounds(m);
    let crit = [1.0 / (m as f64 + 1.0).sqrt(), (3.0 / (m as f64 + 2.0)).sqrt(), 0.0];
    let (mut r1, mut r2, mut rs) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut taken = 0;
    while taken < samples {
        let (a, b) = match rng.gen_range(0..4) {
            0 => (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
            1 => {
                let a: f64 = rng.gen_range(-5.0..5.0);
                let gap = 10f64.powf(rng.gen_range(-5.5..-1.0));
                (a, a + if rng.gen_bool(0.5) { gap } else { -gap })
            }
            2 => {
                let a = 10f64.powf(rng.gen_range(0.0..6.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                (a, a * (1.0 + rng.gen_range(-0.5..0.5)))
            }
            _ => {
                let c = crit[rng.gen_range(0..crit.len())] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let gap = 10f64.powf(rng.gen_range(-5.5..-2.0));
                (c - 0.5 * gap, c + 0.5 * gap)
            }
        };
        let gap = (a - b).abs();
        if gap < 1e-6 {
            continue;
        }
        taken += 1;
        let d1 = (first(a) - first(b)).abs() / gap;
        let d2 = (second(a) - second(b)).abs() / gap;
        r1 = r1.max(d1);
        r2 = r2.max(d2);
        rs = rs.max(d1 + d2);
    }
    let slack = 1.0 + 1e-8;
    Ok(CmReport {
        m,
        samples,
        max_ratio_first: r1,
        bound_first: b1,
        max_ratio_second: r2,
        bound_second: b2,
        max_ratio_sum: rs,
        passed: r1 <= b1 * slack && r2 <= b2 * slack && rs <= (b1 + b2) * slack,
    })
}
