//! Difference-quotient Triebel-Lizorkin seminorms.
//!
//! `||g||^p = int ( int |delta_alpha D^m g(x)|^q dalpha / |alpha|^{d + q(s-m)} )^{p/q} dx`
//! with the inner integral over the box of lattice offsets, the omitted
//! origin cell from the first-order Taylor expansion, and the periodic images
//! of the box (where `delta_alpha` repeats) summed in closed form.

use rayon::prelude::*;

use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::grid::GridSpec;
use crate::quadrature::{image_sum_power, origin_directions};
use crate::summation::CompensatedSum;

/// Components of `D^m g` with their multiplicities.
fn derivative_components(g: &InterfaceField, m: usize) -> Result<Vec<(InterfaceField, f64)>> {
    match m {
        0 => Ok(vec![(g.clone(), 1.0)]),
        1 => Ok(g.gradient()?.into_iter().map(|c| (c, 1.0)).collect()),
        2 => {
            let h = g.hessian()?;
            if h.len() == 1 {
                Ok(h.into_iter().map(|c| (c, 1.0)).collect())
            } else {
                let w = [1.0, 2.0, 1.0];
                Ok(h.into_iter().zip(w).collect())
            }
        }
        _ => Err(MuskatError::InvalidParameter(format!(
            "Triebel seminorm supports s < 3, got m = {m}"
        ))),
    }
}

struct Node {
    off: [i64; 2],
    disp: [f64; 2],
    /// trapezoid weight times `|alpha|^{-e}` plus the periodic images.
    weight: f64,
    /// `|alpha|^{-sigma}` for the sup form.
    sup_scale: f64,
}

fn nodes(grid: &GridSpec, e: f64, sigma: f64, images: bool) -> Vec<Node> {
    let h = grid.spacing();
    let half = (grid.n() / 2) as i64;
    let mut out = Vec::new();
    let (lo1, hi1) = if grid.dim() == 1 { (0, 0) } else { (-half, half) };
    for i in -half..=half {
        for j in lo1..=hi1 {
            if i == 0 && j == 0 {
                continue;
            }
            let disp = [i as f64 * h, j as f64 * h];
            let r = disp[0].hypot(disp[1]);
            let mut face = h.powi(grid.dim() as i32);
            if i.abs() == half {
                face *= 0.5;
            }
            if grid.dim() == 2 && j.abs() == half {
                face *= 0.5;
            }
            let mut weight = r.powf(-e);
            if images {
                weight += image_sum_power(grid, [i, j], e);
            }
            out.push(Node {
                off: [i, j],
                disp,
                weight: face * weight,
                sup_scale: r.powf(-sigma),
            });
        }
    }
    out.sort_by(|a, b| {
        let ra = a.disp[0].hypot(a.disp[1]);
        let rb = b.disp[0].hypot(b.disp[1]);
        ra.total_cmp(&rb).then(a.off.cmp(&b.off))
    });
    out
}

/// `||g||_{F^s_{p,q} dot}` for `s` in `(m, m+1)`, `m <= 2`, `p` in `[1, inf)`,
/// `q` in `[1, inf]`.
pub fn triebel_seminorm(g: &InterfaceField, s: f64, p: f64, q: f64) -> Result<f64> {
    if !(s > 0.0) || s.fract() == 0.0 || !s.is_finite() {
        return Err(MuskatError::InvalidParameter(format!(
            "smoothness must be positive and non-integer, got {s}"
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(MuskatError::InvalidParameter(format!(
            "p must lie in [1, inf), got {p}"
        )));
    }
    if !(q >= 1.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "q must lie in [1, inf], got {q}"
        )));
    }
    let m = s.floor() as usize;
    let sigma = s - m as f64;
    let comps = derivative_components(g, m)?;
    let grid = *g.grid();
    let d = grid.dim();
    let sup_form = q.is_infinite();
    let e = d as f64 + if sup_form { 0.0 } else { q * sigma };
    let node_set = nodes(&grid, e, sigma, !sup_form);
    // Taylor data for the origin cell: omega . grad of every component
    let grads: Vec<Vec<InterfaceField>> = if sup_form {
        Vec::new()
    } else {
        comps
            .iter()
            .map(|(c, _)| c.gradient())
            .collect::<Result<_>>()?
    };
    let rays: Vec<([f64; 2], f64)> = origin_directions(&grid)
        .into_iter()
        .map(|(dir, ang, reach)| {
            let k = q * (1.0 - sigma);
            (dir, ang * reach.powf(k) / k)
        })
        .collect();
    let inner: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let diff_norm = |node: &Node| {
                let y = grid.offset_index(x, node.off);
                let mut sq = 0.0;
                for (c, w) in &comps {
                    let a = c.slope();
                    let dv = c.values()[x] - c.values()[y] + a[0] * node.disp[0] + a[1] * node.disp[1];
                    sq += w * dv * dv;
                }
                sq.sqrt()
            };
            if sup_form {
                return node_set
                    .iter()
                    .map(|n| diff_norm(n) * n.sup_scale)
                    .fold(0.0, f64::max);
            }
            let mut acc = CompensatedSum::new();
            for node in &node_set {
                acc.add(node.weight * diff_norm(node).powf(q));
            }
            for &(dir, w) in &rays {
                let mut sq = 0.0;
                for ((_, cw), gr) in comps.iter().zip(&grads) {
                    let mut dv = dir[0] * gr[0].values()[x];
                    if d == 2 {
                        dv += dir[1] * gr[1].values()[x];
                    }
                    sq += cw * dv * dv;
                }
                acc.add(w * sq.sqrt().powf(q));
            }
            acc.value().powf(1.0 / q)
        })
        .collect();
    let mut outer = CompensatedSum::new();
    for v in inner {
        outer.add(v.powf(p));
    }
    Ok((outer.value() * grid.cell_volume()).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::sobolev_seminorm;
    use std::f64::consts::PI;

    #[test]
    fn f22_against_sobolev_single_modes() {
        let g = GridSpec::new(1, 2.0 * PI, 128).unwrap();
        for k in [1.0, 3.0, 9.0] {
            let f = InterfaceField::from_fn(g, |x| (k * x[0]).cos()).unwrap();
            let t = triebel_seminorm(&f, 0.5, 2.0, 2.0).unwrap();
            let h = sobolev_seminorm(&f, 0.5).unwrap();
            assert!((t / h - (2.0 * PI).sqrt()).abs() < 5e-3 * (2.0 * PI).sqrt(), "k = {k}: {}", t / h);
        }
    }

    #[test]
    fn constants_vanish_and_bad_exponents_fail() {
        let g = GridSpec::new(1, 1.0, 32).unwrap();
        let c = InterfaceField::constant(g, 1.0).unwrap();
        assert_eq!(triebel_seminorm(&c, 0.5, 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(triebel_seminorm(&c, 1.5, 3.0, f64::INFINITY).unwrap(), 0.0);
        assert!(triebel_seminorm(&c, 1.0, 2.0, 2.0).is_err());
        assert!(triebel_seminorm(&c, 0.5, 0.5, 2.0).is_err());
        assert!(triebel_seminorm(&c, 0.5, 2.0, 0.0).is_err());
    }
}
