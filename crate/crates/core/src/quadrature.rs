//! Node sets and weights for the singular integrals.
//!
//! Nodes are the nonzero lattice offsets of the box `[-L/2, L/2]^d`, grouped
//! into `(alpha, -alpha)` pairs and sorted by `|alpha|`. Weights are
//! trapezoidal (half weight on box faces) times the cell average of
//! `1 - chi(|alpha| / mu2)`. Two optional corrections complete the rule:
//!
//! * origin cell: the omitted `alpha = 0` cell is integrated from the local
//!   Taylor expansion of the integrand, with the cutoff integrated exactly
//!   along each ray;
//! * periodized tail: the part of `R^d` outside the box is folded back onto
//!   the box through the periodic images of the linearized kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffProfile;
use crate::error::{MuskatError, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Truncate at the box boundary.
    None,
    /// First-order (linearized) correction from periodic images outside the box.
    Periodized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub tail: TailMode,
    pub origin_correction: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            tail: TailMode::Periodized,
            origin_correction: true,
        }
    }
}

impl QuadratureSpec {
    pub fn truncated() -> Self {
        Self {
            tail: TailMode::None,
            origin_correction: true,
        }
    }
}

/// One `(alpha, -alpha)` node pair.
#[derive(Debug, Clone, Copy)]
pub struct NodePair {
    pub offset: [i64; 2],
    /// `|alpha|` in physical units.
    pub radius: f64,
    pub unit: [f64; 2],
    /// `h^d` times the trapezoid face factor.
    pub trap: f64,
    /// Cell average of `1 - chi(|alpha| / mu2)`; 1 for the exact kernel.
    pub cut: f64,
    /// Periodic-image sum `sum_{n != 0} |alpha + nL|^{-(d+1)}` (slope-free).
    pub image_sum: f64,
}

/// Ray used by the origin-cell correction: direction `omega` and weight
/// `dtheta * int_0^{R(theta)} (1 - chi(r / mu2)) dr`.
#[derive(Debug, Clone, Copy)]
pub struct OriginRay {
    pub dir: [f64; 2],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct NodePlan {
    pub grid: GridSpec,
    pub pairs: Vec<NodePair>,
    pub origin: Vec<OriginRay>,
    pub spec: QuadratureSpec,
    pub mu2: Option<f64>,
    pub cutoff: CutoffProfile,
}

const ORIGIN_SEGMENTS: usize = 8;

/// Gauss-Legendre nodes/weights on [-1, 1] (8 points).
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

impl NodePlan {
    /// `mu2 = None` builds the exact (unregularized) kernel.
    pub fn new(
        grid: GridSpec,
        mu2: Option<f64>,
        cutoff: CutoffProfile,
        spec: QuadratureSpec,
    ) -> Result<Self> {
        if let Some(mu) = mu2 {
            if !(mu > 0.0) || 2.0 * mu > 0.5 * grid.period() {
                return Err(MuskatError::InvalidParameter(format!(
                    "mu2 = {mu} must be positive and at most L/4 = {}",
                    0.25 * grid.period()
                )));
            }
        }
        let pairs = build_pairs(&grid, mu2, cutoff, spec.tail);
        let origin = if spec.origin_correction {
            build_origin(&grid, mu2, cutoff)
        } else {
            Vec::new()
        };
        Ok(Self {
            grid,
            pairs,
            origin,
            spec,
            mu2,
            cutoff,
        })
    }

    pub fn node_count(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Slope-dependent periodic-image weights for the linearized tail:
    /// `sum_{n != 0} |beta + nL|^{-(d+1)} <(beta + nL)^ . a>^{-(d+1)}` per pair.
    pub fn tail_weights(&self, slope: [f64; 2]) -> Vec<f64> {
        if self.spec.tail == TailMode::None {
            return vec![0.0; self.pairs.len()];
        }
        if self.grid.dim() == 1 {
            let factor = 1.0 / (1.0 + slope[0] * slope[0]);
            return self.pairs.iter().map(|p| p.image_sum * factor).collect();
        }
        if slope == [0.0, 0.0] {
            return self.pairs.iter().map(|p| p.image_sum).collect();
        }
        self.pairs
            .iter()
            .map(|p| image_sum_2d(self.grid.period(), p.offset, self.grid.spacing(), slope))
            .collect()
    }
}

fn build_pairs(
    grid: &GridSpec,
    mu2: Option<f64>,
    cutoff: CutoffProfile,
    tail: TailMode,
) -> Vec<NodePair> {
    let n = grid.n() as i64;
    let half = n / 2;
    let h = grid.spacing();
    let period = grid.period();
    let mut pairs = Vec::new();
    if grid.dim() == 1 {
        for k in 1..=half {
            let r = k as f64 * h;
            let face = if k == half { 0.5 } else { 1.0 };
            let cut = match mu2 {
                None => 1.0,
                Some(mu) => {
                    let hi = if k == half { r } else { r + 0.5 * h };
                    let lo = r - 0.5 * h;
                    cutoff.complement_integral(lo, hi, mu) / (hi - lo)
                }
            };
            let image_sum = match tail {
                TailMode::None => 0.0,
                TailMode::Periodized => image_sum_1d(period, r),
            };
            pairs.push(NodePair {
                offset: [k, 0],
                radius: r,
                unit: [1.0, 0.0],
                trap: h * face,
                cut,
                image_sum,
            });
        }
    } else {
        for i in -half..=half {
            for j in -half..=half {
                if !(i > 0 || (i == 0 && j > 0)) {
                    continue;
                }
                let x = i as f64 * h;
                let y = j as f64 * h;
                let r = x.hypot(y);
                let mut face = 1.0;
                if i.abs() == half {
                    face *= 0.5;
                }
                if j.abs() == half {
                    face *= 0.5;
                }
                let cut = match mu2 {
                    None => 1.0,
                    Some(mu) => cell_average_2d(x, y, h, mu, cutoff),
                };
                let image_sum = match tail {
                    TailMode::None => 0.0,
                    TailMode::Periodized => image_sum_2d(period, [i, j], h, [0.0, 0.0]),
                };
                pairs.push(NodePair {
                    offset: [i, j],
                    radius: r,
                    unit: [x / r, y / r],
                    trap: h * h * face,
                    cut,
                    image_sum,
                });
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.radius
            .total_cmp(&b.radius)
            .then(a.offset[0].cmp(&b.offset[0]))
            .then(a.offset[1].cmp(&b.offset[1]))
    });
    pairs
}

/// `sum_{n != 0} (beta + nL)^{-2} = pi^2 / (L^2 sin^2(pi beta / L)) - beta^{-2}`.
fn image_sum_1d(period: f64, beta: f64) -> f64 {
    let s = (PI * beta / period).sin();
    (PI * PI) / (period * period * s * s) - 1.0 / (beta * beta)
}

const IMAGE_SHELLS: i64 = 16;

fn image_sum_2d(period: f64, offset: [i64; 2], h: f64, slope: [f64; 2]) -> f64 {
    let bx = offset[0] as f64 * h;
    let by = offset[1] as f64 * h;
    let weight = |x: f64, y: f64| {
        let r = x.hypot(y);
        let t = (x * slope[0] + y * slope[1]) / r;
        let bracket = 1.0 + t * t;
        1.0 / (r * r * r * bracket * bracket.sqrt())
    };
    let mut acc = crate::summation::CompensatedSum::new();
    for a in -IMAGE_SHELLS..=IMAGE_SHELLS {
        for b in -IMAGE_SHELLS..=IMAGE_SHELLS {
            if a == 0 && b == 0 {
                continue;
            }
            acc.add(weight(bx + a as f64 * period, by + b as f64 * period));
        }
    }
    // far field outside the square of half-width (M + 1/2) L, in polar form
    let radius = (IMAGE_SHELLS as f64 + 0.5) * period;
    let mut far = 0.0;
    let m = 256;
    for q in 0..m {
        let th = (q as f64 + 0.5) * 2.0 * PI / m as f64;
        let (s, c) = th.sin_cos();
        let t = c * slope[0] + s * slope[1];
        let bracket = 1.0 + t * t;
        let theta_part = 1.0 / (bracket * bracket.sqrt());
        far += theta_part * c.abs().max(s.abs());
    }
    far *= 2.0 * PI / m as f64 / radius;
    acc.add(far);
    acc.value()
}

fn cell_average_2d(x: f64, y: f64, h: f64, mu: f64, cutoff: CutoffProfile) -> f64 {
    let r = x.hypot(y);
    let reach = h * std::f64::consts::FRAC_1_SQRT_2;
    if r - reach >= 2.0 * mu {
        return 1.0;
    }
    if r + reach <= mu {
        return 0.0;
    }
    let mut acc = 0.0;
    for &(u, wu) in &GL8 {
        for &(v, wv) in &GL8 {
            let px = x + 0.5 * h * u;
            let py = y + 0.5 * h * v;
            acc += 0.25 * wu * wv * (1.0 - cutoff.eval_unchecked(px.hypot(py) / mu));
        }
    }
    acc
}

fn build_origin(grid: &GridSpec, mu2: Option<f64>, cutoff: CutoffProfile) -> Vec<OriginRay> {
    let radial = |reach: f64| match mu2 {
        None => reach,
        Some(mu) => cutoff.complement_integral(0.0, reach, mu),
    };
    origin_directions(grid)
        .into_iter()
        .map(|(dir, angular, reach)| OriginRay {
            dir,
            weight: angular * radial(reach),
        })
        .collect()
}

/// Directions, angular weights and ray lengths `R(theta)` covering the cell
/// `[-h/2, h/2]^d` around the origin.
pub(crate) fn origin_directions(grid: &GridSpec) -> Vec<([f64; 2], f64, f64)> {
    let h = grid.spacing();
    if grid.dim() == 1 {
        return vec![([1.0, 0.0], 1.0, 0.5 * h), ([-1.0, 0.0], 1.0, 0.5 * h)];
    }
    // the ray length has kinks on the diagonals, so integrate segment by
    // segment between them
    let mut rays = Vec::with_capacity(ORIGIN_SEGMENTS * GL8.len());
    let seg = 2.0 * PI / ORIGIN_SEGMENTS as f64;
    for s in 0..ORIGIN_SEGMENTS {
        let a = -PI / 4.0 + s as f64 * seg;
        for &(u, wu) in &GL8 {
            let th = a + 0.5 * seg * (u + 1.0);
            let (sn, cs) = th.sin_cos();
            let reach = 0.5 * h / cs.abs().max(sn.abs());
            rays.push(([cs, sn], 0.5 * seg * wu, reach));
        }
    }
    rays
}

/// `sum_{n != 0} |beta + nL|^{-e}` for `e > d`, the offset given in cells.
pub(crate) fn image_sum_power(grid: &GridSpec, offset: [i64; 2], e: f64) -> f64 {
    let h = grid.spacing();
    let period = grid.period();
    let mut acc = crate::summation::CompensatedSum::new();
    if grid.dim() == 1 {
        let beta = offset[0] as f64 * h;
        let m = 256;
        for n in 1..=m {
            let n = n as f64 * period;
            acc.add((n + beta).abs().powf(-e));
            acc.add((n - beta).abs().powf(-e));
        }
        // midpoint rule for the remaining terms
        let edge = (m as f64 + 0.5) * period;
        acc.add(((edge + beta).powf(1.0 - e) + (edge - beta).powf(1.0 - e)) / (period * (e - 1.0)));
        return acc.value();
    }
    let bx = offset[0] as f64 * h;
    let by = offset[1] as f64 * h;
    for a in -IMAGE_SHELLS..=IMAGE_SHELLS {
        for b in -IMAGE_SHELLS..=IMAGE_SHELLS {
            if a == 0 && b == 0 {
                continue;
            }
            let r = (bx + a as f64 * period).hypot(by + b as f64 * period);
            acc.add(r.powf(-e));
        }
    }
    let radius = (IMAGE_SHELLS as f64 + 0.5) * period;
    let m = 256;
    let mut far = 0.0;
    for q in 0..m {
        let th = (q as f64 + 0.5) * 2.0 * PI / m as f64;
        let (s, c) = th.sin_cos();
        let reach = radius / c.abs().max(s.abs());
        far += reach.powf(2.0 - e) / (e - 2.0);
    }
    acc.add(far * 2.0 * PI / m as f64);
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_cover_the_box_once() {
        let g = GridSpec::new(2, 1.0, 8).unwrap();
        let plan = NodePlan::new(g, None, CutoffProfile::Quintic, QuadratureSpec::default()).unwrap();
        // (n+1)^2 - 1 lattice offsets in the closed box, two per pair
        assert_eq!(plan.node_count(), 80);
        let total: f64 = plan.pairs.iter().map(|p| 2.0 * p.trap).sum();
        let h2 = g.cell_volume();
        assert!((total + h2 - 1.0).abs() < 1e-12);
        for w in plan.pairs.windows(2) {
            assert!(w[0].radius <= w[1].radius);
        }
    }

    #[test]
    fn image_sum_1d_matches_direct_sum() {
        let period = 2.0 * PI;
        for &beta in &[0.05, 1.0, 3.0, PI] {
            let direct: f64 = (1..200_000)
                .map(|n| {
                    let n = n as f64;
                    1.0 / (beta + n * period).powi(2) + 1.0 / (beta - n * period).powi(2)
                })
                .sum::<f64>()
                + 2.0 / (period * period * 199_999.5);
            assert!((direct - image_sum_1d(period, beta)).abs() < 1e-9);
        }
    }

    #[test]
    fn origin_weights_integrate_the_cell() {
        // with f = 1/|alpha| the cell integral is 4 h ln(1 + sqrt 2)
        let g = GridSpec::new(2, 1.0, 16).unwrap();
        let plan = NodePlan::new(g, None, CutoffProfile::Quintic, QuadratureSpec::default()).unwrap();
        let total: f64 = plan.origin.iter().map(|r| r.weight).sum();
        let exact = 4.0 * g.spacing() * (1.0 + 2f64.sqrt()).ln();
        assert!((total - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn cutoff_weights_vanish_inside_mu2() {
        let g = GridSpec::new(1, 2.0 * PI, 256).unwrap();
        let h = g.spacing();
        let plan = NodePlan::new(g, Some(10.0 * h), CutoffProfile::Quintic, QuadratureSpec::default())
            .unwrap();
        assert_eq!(plan.pairs[5].cut, 0.0);
        assert_eq!(plan.pairs[40].cut, 1.0);
        assert_eq!(plan.origin[0].weight, 0.0);
        assert!(NodePlan::new(g, Some(2.0), CutoffProfile::Quintic, QuadratureSpec::default()).is_err());
    }
}
