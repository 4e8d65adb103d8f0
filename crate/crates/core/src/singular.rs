//! Quadrature of the Muskat nonlinearity.
//!
//! `N(f, g)(x) = int E_alpha f(x) / <Delta_alpha g(x)>^{d+1} (1 - chi(|alpha|/mu2)) dalpha / |alpha|^d`
//! evaluated with the paired node plan of [`crate::quadrature`]. Every
//! output point is computed by one sequential loop over the sorted pairs, so
//! results do not depend on how points are distributed over threads.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::cutoff::CutoffProfile;
use crate::error::{MuskatError, Result};
use crate::field::{lattice, InterfaceField};
use crate::grid::GridSpec;
use crate::params::RegParams;
use crate::quadrature::{NodePair, NodePlan, QuadratureSpec};
use crate::summation::CompensatedSum;

/// `Delta_alpha f = (f - shift(f, alpha)) / |alpha|`, affine part included.
pub fn finite_difference_slope(f: &InterfaceField, offset: &[i64]) -> Result<InterfaceField> {
    let off = lattice(offset);
    if off == [0, 0] {
        return Err(MuskatError::ZeroOffset);
    }
    let grid = f.grid();
    let h = grid.spacing();
    let r = (off[0] as f64 * h).hypot(off[1] as f64 * h);
    let a = f.slope();
    let sa = (a[0] * off[0] as f64 * h + a[1] * off[1] as f64 * h) / r;
    let p = f.values();
    let values = (0..grid.len())
        .map(|i| (p[i] - p[grid.offset_index(i, off)]) / r + sa)
        .collect();
    InterfaceField::new(*grid, values)
}

/// `E_alpha f = alpha_hat . grad f - Delta_alpha f`.
pub fn e_alpha(f: &InterfaceField, offset: &[i64]) -> Result<InterfaceField> {
    let slope = finite_difference_slope(f, offset)?;
    let off = lattice(offset);
    let grid = f.grid();
    let h = grid.spacing();
    let (x, y) = (off[0] as f64 * h, off[1] as f64 * h);
    let r = x.hypot(y);
    let unit = [x / r, y / r];
    let grad = f.gradient()?;
    let values = (0..grid.len())
        .map(|i| {
            let mut dir = 0.0;
            for (axis, g) in grad.iter().enumerate() {
                dir += unit[axis] * g.values()[i];
            }
            dir - slope.values()[i]
        })
        .collect();
    InterfaceField::new(*grid, values)
}

/// `<a>^{d+1}`.
#[inline]
fn bracket_power(dim: usize, a: f64) -> f64 {
    let b = 1.0 + a * a;
    if dim == 1 {
        b
    } else {
        b * b.sqrt()
    }
}

/// Index arithmetic for `x - alpha` and `x + alpha`.
#[derive(Clone, Copy)]
struct Neighbors {
    n: i64,
    dim: usize,
}

impl Neighbors {
    #[inline]
    fn pair(&self, i: usize, off: [i64; 2]) -> (usize, usize) {
        let n = self.n;
        if self.dim == 1 {
            let i = i as i64;
            (((i - off[0]).rem_euclid(n)) as usize, ((i + off[0]).rem_euclid(n)) as usize)
        } else {
            let r = i as i64 / n;
            let c = i as i64 % n;
            let m = (r - off[0]).rem_euclid(n) * n + (c - off[1]).rem_euclid(n);
            let p = (r + off[0]).rem_euclid(n) * n + (c + off[1]).rem_euclid(n);
            (m as usize, p as usize)
        }
    }
}

/// Local data of one field needed at every output point.
struct Local {
    p: Vec<f64>,
    grad: Vec<Vec<f64>>,
    hess: Vec<Vec<f64>>,
    slope: [f64; 2],
}

impl Local {
    fn new(f: &InterfaceField) -> Result<Self> {
        Ok(Self {
            p: f.values().to_vec(),
            grad: f
                .periodic_gradient()?
                .into_iter()
                .map(InterfaceField::into_values)
                .collect(),
            hess: f.hessian()?.into_iter().map(InterfaceField::into_values).collect(),
            slope: f.slope(),
        })
    }

    #[inline]
    fn directional(&self, i: usize, dir: [f64; 2]) -> f64 {
        let mut s = dir[0] * self.grad[0][i];
        if self.grad.len() == 2 {
            s += dir[1] * self.grad[1][i];
        }
        s
    }

    /// `omega . (grad p + a)`.
    #[inline]
    fn full_directional(&self, i: usize, dir: [f64; 2]) -> f64 {
        self.directional(i, dir) + dir[0] * self.slope[0] + dir[1] * self.slope[1]
    }

    #[inline]
    fn quadratic(&self, i: usize, dir: [f64; 2]) -> f64 {
        if self.hess.len() == 1 {
            dir[0] * dir[0] * self.hess[0][i]
        } else {
            dir[0] * dir[0] * self.hess[0][i]
                + 2.0 * dir[0] * dir[1] * self.hess[1][i]
                + dir[1] * dir[1] * self.hess[2][i]
        }
    }
}

/// Which parts of the rule enter an evaluation.
#[derive(Clone, Copy)]
struct Parts {
    r_lo: f64,
    r_hi: f64,
    origin: bool,
    tail: bool,
}

const ALL_PARTS: Parts = Parts {
    r_lo: 0.0,
    r_hi: f64::INFINITY,
    origin: true,
    tail: true,
};

/// Reusable evaluator for one grid, kernel and quadrature rule.
#[derive(Debug)]
pub struct SingularIntegral {
    plan: NodePlan,
    /// Pair weights `trap * cut / |alpha|^d`.
    weights: Vec<f64>,
    tails: Mutex<HashMap<[u64; 2], Arc<Vec<f64>>>>,
}

impl SingularIntegral {
    pub fn regularized(grid: GridSpec, params: &RegParams, quad: QuadratureSpec) -> Result<Self> {
        params.validate()?;
        Self::from_plan(NodePlan::new(grid, Some(params.mu2), params.cutoff, quad)?)
    }

    /// Kernel without cutoff (`mu2 = 0`).
    pub fn exact(grid: GridSpec, quad: QuadratureSpec) -> Result<Self> {
        Self::from_plan(NodePlan::new(grid, None, CutoffProfile::default(), quad)?)
    }

    fn from_plan(plan: NodePlan) -> Result<Self> {
        let d = plan.grid.dim() as i32;
        let weights = plan
            .pairs
            .iter()
            .map(|p| p.trap * p.cut / p.radius.powi(d))
            .collect();
        Ok(Self {
            plan,
            weights,
            tails: Mutex::new(HashMap::new()),
        })
    }

    pub fn plan(&self) -> &NodePlan {
        &self.plan
    }

    pub fn grid(&self) -> &GridSpec {
        &self.plan.grid
    }

    pub fn node_count(&self) -> usize {
        self.plan.node_count()
    }

    /// Sum of the coefficients multiplying `f(x -+ alpha)` in the linearized
    /// operator; `1 / kernel_mass` bounds monotone explicit Euler steps.
    pub fn kernel_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (p, w) in self.plan.pairs.iter().zip(&self.weights) {
            acc.add(2.0 * w / p.radius);
            acc.add(2.0 * p.trap * p.image_sum);
        }
        acc.value()
    }

    fn tail_table(&self, slope: [f64; 2]) -> Arc<Vec<f64>> {
        let key = [slope[0].to_bits(), slope[1].to_bits()];
        let mut guard = self.tails.lock().expect("tail cache poisoned");
        guard
            .entry(key)
            .or_insert_with(|| {
                let t = self.plan.tail_weights(slope);
                Arc::new(
                    self.plan
                        .pairs
                        .iter()
                        .zip(t)
                        .map(|(p, t)| p.trap * t)
                        .collect(),
                )
            })
            .clone()
    }

    fn check_grid(&self, f: &InterfaceField) -> Result<()> {
        if *f.grid() != self.plan.grid {
            return Err(MuskatError::GridMismatch {
                left: self.plan.grid.describe(),
                right: f.grid().describe(),
            });
        }
        Ok(())
    }

    /// `N(f, f)`.
    pub fn apply(&self, f: &InterfaceField) -> Result<InterfaceField> {
        self.apply_general(f, f)
    }

    /// `N(f, g)`: numerator from `f`, slope denominator from `g`.
    pub fn apply_general(&self, f: &InterfaceField, g: &InterfaceField) -> Result<InterfaceField> {
        self.evaluate(f, g, ALL_PARTS)
    }

    /// Contribution of the pairs with `r_lo <= |alpha| <= r_hi` only.
    pub fn band_contribution(
        &self,
        f: &InterfaceField,
        r_lo: f64,
        r_hi: f64,
    ) -> Result<InterfaceField> {
        self.evaluate(
            f,
            f,
            Parts {
                r_lo,
                r_hi,
                origin: false,
                tail: false,
            },
        )
    }

    fn evaluate(&self, f: &InterfaceField, g: &InterfaceField, parts: Parts) -> Result<InterfaceField> {
        self.check_grid(f)?;
        self.check_grid(g)?;
        let lf = Local::new(f)?;
        let lg = if std::ptr::eq(f, g) { None } else { Some(Local::new(g)?) };
        let lg = lg.as_ref().unwrap_or(&lf);
        let grid = self.plan.grid;
        let nb = Neighbors {
            n: grid.n() as i64,
            dim: grid.dim(),
        };
        let tails = if parts.tail {
            Some(self.tail_table(lg.slope))
        } else {
            None
        };
        let pairs = &self.plan.pairs;
        let sf: Vec<f64> = pairs.iter().map(|p| dot(p.unit, lf.slope)).collect();
        let sg: Vec<f64> = pairs.iter().map(|p| dot(p.unit, lg.slope)).collect();
        let ctx = PointCtx {
            plan: &self.plan,
            weights: &self.weights,
            tails: tails.as_deref().map(|v| v.as_slice()),
            sf: &sf,
            sg: &sg,
            f: &lf,
            g: lg,
            nb,
            parts,
        };
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| ctx.point(i))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            let offset = ctx.offending_pair(i);
            return Err(MuskatError::NonFiniteIntegrand {
                point: i,
                offset: offset[..grid.dim()].to_vec(),
            });
        }
        InterfaceField::new(grid, values)
    }

    /// `B = int Delta_alpha u(x) / <Delta_alpha f(x)>^{d+1} d eta(alpha)` at one
    /// grid point, `u` typically `partial_j F_1`.
    pub fn slope_weighted_at(&self, u: &InterfaceField, f: &InterfaceField, point: usize) -> Result<f64> {
        self.check_grid(u)?;
        self.check_grid(f)?;
        let grid = self.plan.grid;
        if point >= grid.len() {
            return Err(MuskatError::InvalidParameter(format!(
                "point {point} outside grid of {} samples",
                grid.len()
            )));
        }
        let lu = Local::new(u)?;
        let lf = Local::new(f)?;
        let nb = Neighbors {
            n: grid.n() as i64,
            dim: grid.dim(),
        };
        let dim = grid.dim();
        let tails = self.tail_table(lf.slope);
        let x = point;
        let mut acc = CompensatedSum::new();
        for (k, pair) in self.plan.pairs.iter().enumerate() {
            let (m, p) = nb.pair(x, pair.offset);
            let r = pair.radius;
            let su = dot(pair.unit, lu.slope);
            let sf = dot(pair.unit, lf.slope);
            let du_plus = (lu.p[x] - lu.p[m]) / r + su;
            let du_minus = (lu.p[x] - lu.p[p]) / r - su;
            let df_plus = (lf.p[x] - lf.p[m]) / r + sf;
            let df_minus = (lf.p[x] - lf.p[p]) / r - sf;
            let term = du_plus / bracket_power(dim, df_plus) + du_minus / bracket_power(dim, df_minus);
            acc.add(self.weights[k] * term);
        }
        let q = (dim + 1) as f64;
        for ray in &self.plan.origin {
            let a = lf.full_directional(x, ray.dir);
            let b = bracket_power(dim, a);
            let main = -0.5 * lu.quadratic(x, ray.dir) / b;
            let cross = 0.5 * lu.full_directional(x, ray.dir) * q * a * lf.quadratic(x, ray.dir)
                / (b * (1.0 + a * a));
            acc.add(ray.weight * (main + cross));
        }
        let mut tail = CompensatedSum::new();
        for (k, pair) in self.plan.pairs.iter().enumerate() {
            let (m, p) = nb.pair(x, pair.offset);
            tail.add(tails[k] * ((lu.p[x] - lu.p[m]) + (lu.p[x] - lu.p[p])));
        }
        acc.add(tail.value());
        let v = acc.value();
        if !v.is_finite() {
            return Err(MuskatError::NonFiniteIntegrand {
                point,
                offset: vec![0; dim],
            });
        }
        Ok(v)
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

struct PointCtx<'a> {
    plan: &'a NodePlan,
    weights: &'a [f64],
    tails: Option<&'a [f64]>,
    sf: &'a [f64],
    sg: &'a [f64],
    f: &'a Local,
    g: &'a Local,
    nb: Neighbors,
    parts: Parts,
}

impl PointCtx<'_> {
    #[inline]
    fn pair_term(&self, x: usize, k: usize, pair: &NodePair) -> f64 {
        let dim = self.nb.dim;
        let (m, p) = self.nb.pair(x, pair.offset);
        let r = pair.radius;
        let (sf, sg) = (self.sf[k], self.sg[k]);
        let grad = self.f.directional(x, pair.unit);
        let pf = &self.f.p;
        let pg = &self.g.p;
        // written so that constant and affine data cancel exactly
        let e_plus = (grad + sf) - ((pf[x] - pf[m]) / r + sf);
        let e_minus = (-grad - sf) - ((pf[x] - pf[p]) / r - sf);
        let d_plus = (pg[x] - pg[m]) / r + sg;
        let d_minus = (pg[x] - pg[p]) / r - sg;
        self.weights[k] * (e_plus / bracket_power(dim, d_plus) + e_minus / bracket_power(dim, d_minus))
    }

    fn point(&self, x: usize) -> f64 {
        let dim = self.nb.dim;
        let mut acc = CompensatedSum::new();
        for (k, pair) in self.plan.pairs.iter().enumerate() {
            if pair.radius < self.parts.r_lo || pair.radius > self.parts.r_hi {
                continue;
            }
            acc.add(self.pair_term(x, k, pair));
        }
        if self.parts.origin {
            for ray in &self.plan.origin {
                let a = self.g.full_directional(x, ray.dir);
                acc.add(ray.weight * 0.5 * self.f.quadratic(x, ray.dir) / bracket_power(dim, a));
            }
        }
        if let Some(tails) = self.tails {
            let pf = &self.f.p;
            let mut tail = CompensatedSum::new();
            for (k, pair) in self.plan.pairs.iter().enumerate() {
                let (m, p) = self.nb.pair(x, pair.offset);
                tail.add(tails[k] * ((pf[x] - pf[m]) + (pf[x] - pf[p])));
            }
            acc.add(-tail.value());
        }
        acc.value()
    }

    fn offending_pair(&self, x: usize) -> [i64; 2] {
        for (k, pair) in self.plan.pairs.iter().enumerate() {
            if !self.pair_term(x, k, pair).is_finite() {
                return pair.offset;
            }
        }
        [0, 0]
    }
}

/// One-shot `N(f, f)` with the regularized kernel.
pub fn rhs_regularized(f: &InterfaceField, params: &RegParams, quad: QuadratureSpec) -> Result<InterfaceField> {
    SingularIntegral::regularized(*f.grid(), params, quad)?.apply(f)
}

/// One-shot evaluation of the unregularized right-hand side.
pub fn rhs_exact(f: &InterfaceField, quad: QuadratureSpec) -> Result<InterfaceField> {
    SingularIntegral::exact(*f.grid(), quad)?.apply(f)
}

/// One-shot `N(f, g)` with the regularized kernel.
pub fn rhs_general(
    f: &InterfaceField,
    g: &InterfaceField,
    params: &RegParams,
    quad: QuadratureSpec,
) -> Result<InterfaceField> {
    f.ensure_same_grid(g)?;
    SingularIntegral::regularized(*f.grid(), params, quad)?.apply_general(f, g)
}

/// `c_d` with `PV int alpha_hat . grad e - Delta_alpha e  dalpha/|alpha|^d = -c_d |k| e`
/// for plane waves `e = exp(i k . x)`, i.e. `c_d = int (1 - cos(alpha_1)) dalpha / |alpha|^{d+1}`.
///
/// Computed once per dimension by direct radial quadrature.
pub fn linear_constant(d: usize) -> Result<f64> {
    static C1: OnceLock<f64> = OnceLock::new();
    static C2: OnceLock<f64> = OnceLock::new();
    match d {
        1 => Ok(*C1.get_or_init(|| 2.0 * radial_integral(1.0))),
        2 => Ok(*C2.get_or_init(|| {
            // theta in [0, 2 pi), kinks of |cos| at +-pi/2
            let mut total = 0.0;
            let segs = 8;
            let seg = 2.0 * PI / segs as f64;
            for s in 0..segs {
                let a = -PI / 2.0 + s as f64 * seg;
                for &(u, w) in &GL_PANEL {
                    let th = a + 0.5 * seg * (u + 1.0);
                    total += 0.5 * seg * w * radial_integral(th.cos().abs());
                }
            }
            total
        })),
        _ => Err(MuskatError::InvalidParameter(format!(
            "dimension must be 1 or 2, got {d}"
        ))),
    }
}

/// Plane-wave symbol `-c_d |xi|` of the linearized right-hand side.
pub fn plane_wave_symbol(d: usize, xi: [f64; 2]) -> Result<f64> {
    Ok(-linear_constant(d)? * xi[0].hypot(xi[1]))
}

const GL_PANEL: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// `int_0^inf (1 - cos(c r)) / r^2 dr` by panel Gauss-Legendre on `[0, R]`
/// plus an asymptotic tail.
fn radial_integral(c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let big_r = 400.0 * PI;
    let panels = 4000;
    let width = big_r / panels as f64;
    let mut acc = CompensatedSum::new();
    for j in 0..panels {
        let a = j as f64 * width;
        for &(u, w) in &GL_PANEL {
            let r = a + 0.5 * width * (u + 1.0);
            let cr = c * r;
            // 1 - cos(cr) = 2 sin^2(cr/2), stable near 0
            let s = (0.5 * cr).sin();
            acc.add(0.5 * width * w * 2.0 * s * s / (r * r));
        }
    }
    // int_R^inf (1 - cos(c r)) / r^2 dr, asymptotic expansion in 1/(cR)
    let x = c * big_r;
    let tail = 1.0 / big_r
        - c * (-(x.sin()) / (x * x) + 2.0 * x.cos() / (x * x * x) + 6.0 * x.sin() / x.powi(4));
    acc.add(tail);
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, 2.0 * PI, n).unwrap()
    }

    #[test]
    fn linear_constant_matches_closed_forms() {
        assert!((linear_constant(1).unwrap() - PI).abs() < 1e-6);
        assert!((linear_constant(2).unwrap() - 2.0 * PI).abs() < 1e-6);
        assert!(linear_constant(3).is_err());
    }

    #[test]
    fn slope_and_e_alpha_on_affine_data() {
        let g = GridSpec::new(2, 1.0, 16).unwrap();
        let f = InterfaceField::constant(g, 0.3).unwrap().with_slope([0.5, -1.25]).unwrap();
        let d = finite_difference_slope(&f, &[3, 4]).unwrap();
        let expected = (0.5 * 3.0 - 1.25 * 4.0) / 5.0;
        assert!(d.values().iter().all(|v| (v - expected).abs() < 1e-14));
        let e = e_alpha(&f, &[3, 4]).unwrap();
        assert!(e.max_abs() < 1e-14);
        assert!(finite_difference_slope(&f, &[0, 0]).is_err());
    }

    #[test]
    fn constant_and_affine_fields_are_stationary_exactly() {
        let g = grid1(64);
        let params = RegParams::new(0.1, 0.05).unwrap();
        let f = InterfaceField::constant(g, 2.5).unwrap();
        let r = rhs_regularized(&f, &params, QuadratureSpec::default()).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
        let a = f.clone().with_slope([1.7, 0.0]).unwrap();
        let r = rhs_regularized(&a, &params, QuadratureSpec::default()).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
        let g2 = GridSpec::new(2, 1.0, 16).unwrap();
        let a2 = InterfaceField::constant(g2, -1.0).unwrap().with_slope([0.3, 0.9]).unwrap();
        let r = rhs_exact(&a2, QuadratureSpec::default()).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn small_cosine_decays_at_the_linear_rate() {
        let g = grid1(256);
        let eps = 1e-3;
        let f = InterfaceField::from_fn(g, |x| eps * x[0].cos()).unwrap();
        let r = rhs_exact(&f, QuadratureSpec::default()).unwrap();
        let c = linear_constant(1).unwrap();
        for (i, v) in r.values().iter().enumerate() {
            let want = -c * eps * g.coords(i)[0].cos();
            assert!((v - want).abs() < 1e-3 * eps, "{v} vs {want}");
        }
    }

    #[test]
    fn general_with_itself_is_bit_identical() {
        let g = grid1(64);
        let params = RegParams::new(0.2, 0.05).unwrap();
        let f = InterfaceField::from_fn(g, |x| (x[0]).sin() + 0.3 * (3.0 * x[0]).cos()).unwrap();
        let ev = SingularIntegral::regularized(g, &params, QuadratureSpec::default()).unwrap();
        let a = ev.apply(&f).unwrap();
        let b = ev.apply_general(&f, &f.clone()).unwrap();
        assert_eq!(a.values(), b.values());
    }
}
