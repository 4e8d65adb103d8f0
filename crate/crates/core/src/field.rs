//! Sampled interface heights and the linear operators acting on them.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{MuskatError, Result};
use crate::grid::GridSpec;
use crate::spectral;

/// Height `f(x) = p(x) + a . x` of the interface on a periodic grid.
///
/// `values` holds the periodic part `p`; `slope` is the affine part `a`
/// (zero unless the field was built in affine mode). The affine part never
/// changes under the evolution and is handled analytically by every
/// operator that sees it.
#[derive(Debug, Clone)]
pub struct InterfaceField {
    grid: GridSpec,
    values: Vec<f64>,
    slope: [f64; 2],
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for InterfaceField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.slope == other.slope && self.values == other.values
    }
}

impl InterfaceField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MuskatError::InvalidField(format!(
                "expected {} samples for {}, got {}",
                grid.len(),
                grid.describe(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MuskatError::InvalidField(format!(
                "non-finite sample {} at index {i}",
                values[i]
            )));
        }
        Ok(Self {
            grid,
            values,
            slope: [0.0; 2],
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0).expect("zero field is valid")
    }

    /// Attach an affine part `a . x`.
    pub fn with_slope(mut self, slope: [f64; 2]) -> Result<Self> {
        if !(slope[0].is_finite() && slope[1].is_finite()) {
            return Err(MuskatError::InvalidField("non-finite affine slope".into()));
        }
        if self.grid.dim() == 1 && slope[1] != 0.0 {
            return Err(MuskatError::InvalidField(
                "second slope component must be zero for d = 1".into(),
            ));
        }
        self.slope = slope;
        Ok(self)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slope(&self) -> [f64; 2] {
        self.slope
    }

    pub fn has_slope(&self) -> bool {
        self.slope != [0.0, 0.0]
    }

    /// Unnormalized DFT of the periodic part, computed once per field.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| spectral::forward(&self.grid, &self.values))
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(MuskatError::GridMismatch {
                left: self.grid.describe(),
                right: other.grid.describe(),
            });
        }
        Ok(())
    }

    /// New field on the same grid with the same affine part.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut f = Self::new(self.grid, values)?;
        f.slope = self.slope;
        Ok(f)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// `self + c * other`, affine parts combined the same way.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        let mut f = Self::new(self.grid, values)?;
        f.slope = [
            self.slope[0] + c * other.slope[0],
            self.slope[1] + c * other.slope[1],
        ];
        Ok(f)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        let mut f = self.map(|v| c * v)?;
        f.slope = [c * self.slope[0], c * self.slope[1]];
        Ok(f)
    }

    /// Periodic shift: `shift(f, k)(x) = f(x - k h)`. Exact index permutation.
    ///
    /// Offsets up to one full period in either direction are accepted; a
    /// full-period shift is the identity.
    pub fn shift(&self, offset: &[i64]) -> Result<Self> {
        let n = self.grid.n();
        let d = self.grid.dim();
        if offset.len() != d {
            return Err(MuskatError::InvalidParameter(format!(
                "offset has {} components, grid has dimension {d}",
                offset.len()
            )));
        }
        if offset.iter().any(|o| o.unsigned_abs() as usize > n) {
            return Err(MuskatError::OffsetOutOfRange {
                offset: offset.to_vec(),
                n,
            });
        }
        let off = lattice(offset);
        let values = (0..self.grid.len())
            .map(|i| self.values[self.grid.offset_index(i, off)])
            .collect();
        let mut f = Self::new(self.grid, values)?;
        f.slope = self.slope;
        if self.has_slope() {
            // a . (x - alpha) = a . x - a . alpha
            let h = self.grid.spacing();
            let shift = self.slope[0] * off[0] as f64 * h + self.slope[1] * off[1] as f64 * h;
            for v in &mut f.values {
                *v -= shift;
            }
        }
        Ok(f)
    }

    /// Reflection `x -> -x` (index `i -> -i mod n` on every axis).
    pub fn reflect(&self) -> Result<Self> {
        let n = self.grid.n();
        let values = (0..self.grid.len())
            .map(|flat| {
                let [i, j] = self.grid.unflatten(flat);
                let src = self.grid.flatten([(n - i) % n, (n - j) % n]);
                self.values[src]
            })
            .collect();
        let mut f = Self::new(self.grid, values)?;
        f.slope = [-self.slope[0], -self.slope[1]];
        Ok(f)
    }

    /// Spectral partial derivative of the periodic part along `axis`.
    pub fn periodic_derivative(&self, axis: usize) -> Result<Self> {
        Self::new(self.grid, diff_axis(&self.grid, &self.values, axis))
    }

    /// Gradient of the periodic part only.
    pub fn periodic_gradient(&self) -> Result<Vec<Self>> {
        (0..self.grid.dim())
            .map(|axis| self.periodic_derivative(axis))
            .collect()
    }

    /// Full gradient `grad p + a`, one periodic field per component.
    pub fn gradient(&self) -> Result<Vec<Self>> {
        let mut g = self.periodic_gradient()?;
        for (axis, comp) in g.iter_mut().enumerate() {
            let a = self.slope[axis];
            if a != 0.0 {
                for v in &mut comp.values {
                    *v += a;
                }
            }
        }
        Ok(g)
    }

    /// Second derivatives of the periodic part: `[f_xx]` in 1D and
    /// `[f_xx, f_xy, f_yy]` in 2D.
    pub fn hessian(&self) -> Result<Vec<Self>> {
        if self.grid.dim() == 1 {
            return Ok(vec![Self::new(
                self.grid,
                second_diff_axis(&self.grid, &self.values, 0),
            )?]);
        }
        let fx = diff_axis(&self.grid, &self.values, 0);
        Ok(vec![
            Self::new(self.grid, second_diff_axis(&self.grid, &self.values, 0))?,
            Self::new(self.grid, diff_axis(&self.grid, &fx, 1))?,
            Self::new(self.grid, second_diff_axis(&self.grid, &self.values, 1))?,
        ])
    }

    /// Spectral Laplacian of the periodic part.
    pub fn laplacian(&self) -> Result<Self> {
        let mut out = second_diff_axis(&self.grid, &self.values, 0);
        if self.grid.dim() == 2 {
            let yy = second_diff_axis(&self.grid, &self.values, 1);
            for (o, y) in out.iter_mut().zip(yy) {
                *o += y;
            }
        }
        Self::new(self.grid, out)
    }

    /// Apply a real Fourier symbol `m(xi)` to the periodic part.
    pub fn fourier_multiplier(&self, symbol: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let out = self.fourier_multiplier_complex(symbol)?;
        Self::new(self.grid, out.into_iter().map(|z| z.re).collect())
    }

    /// Like [`fourier_multiplier`](Self::fourier_multiplier) but returns the
    /// complex inverse transform, so callers can inspect the imaginary residue.
    pub fn fourier_multiplier_complex(
        &self,
        symbol: impl Fn([f64; 2]) -> f64,
    ) -> Result<Vec<Complex64>> {
        if self.has_slope() {
            return Err(MuskatError::InvalidField(
                "fourier multipliers act on periodic fields only".into(),
            ));
        }
        let spec = self.spectrum();
        let mut out = Vec::with_capacity(spec.len());
        for (k, z) in spec.iter().enumerate() {
            let xi = self.grid.wavevector(k);
            let m = symbol(xi);
            if !m.is_finite() {
                return Err(MuskatError::NonFiniteSymbol {
                    wavevector: xi[..self.grid.dim()].to_vec(),
                    value: m,
                });
            }
            out.push(z * m);
        }
        Ok(spectral::inverse(&self.grid, &out))
    }

    /// Sharp projection onto integer frequencies with `|k| <= radius`.
    pub fn low_pass(&self, radius: f64) -> Result<Self> {
        let spec = self.spectrum();
        let out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let f = self.grid.frequency(k);
                let r = ((f[0] * f[0] + f[1] * f[1]) as f64).sqrt();
                if r <= radius {
                    *z
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        self.with_values(spectral::inverse_real(&self.grid, &out))
    }

    /// Trigonometric interpolant sampled on `n >= N` points per axis (same
    /// period); the Nyquist bin is split evenly between `+-N/2`.
    pub fn upsample(&self, n: usize) -> Result<Self> {
        let src = self.grid;
        let m = src.n();
        if n < m {
            return Err(MuskatError::InvalidParameter(format!(
                "upsample target {n} is coarser than {m}"
            )));
        }
        if n == m {
            return Ok(self.clone());
        }
        let grid = GridSpec::new(src.dim(), src.period(), n)?;
        let half = (m / 2) as i64;
        let scale = grid.len() as f64 / src.len() as f64;
        let bin = |f: i64| -> Option<(usize, f64)> {
            if f.abs() < half {
                Some((f.rem_euclid(m as i64) as usize, 1.0))
            } else if f.abs() == half {
                Some((half as usize, 0.5))
            } else {
                None
            }
        };
        let spec = self.spectrum();
        let out: Vec<Complex64> = (0..grid.len())
            .map(|k| {
                let f = grid.frequency(k);
                let hit = if src.dim() == 1 {
                    bin(f[0]).map(|(i, w)| (src.flatten([i, 0]), w))
                } else {
                    match (bin(f[0]), bin(f[1])) {
                        (Some((i, a)), Some((j, b))) => Some((src.flatten([i, j]), a * b)),
                        _ => None,
                    }
                };
                match hit {
                    Some((i, w)) => spec[i] * (w * scale),
                    None => Complex64::new(0.0, 0.0),
                }
            })
            .collect();
        Self::new(grid, spectral::inverse_real(&grid, &out))?.with_slope(self.slope)
    }

    /// Index and value of the largest sample (first occurrence wins).
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, self.values[0]);
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn argmin(&self) -> (usize, f64) {
        let mut best = (0, self.values[0]);
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn lattice(offset: &[i64]) -> [i64; 2] {
    [offset[0], offset.get(1).copied().unwrap_or(0)]
}

/// Coefficients of the periodic spectral first-derivative stencil,
/// `c_k = (pi/L) (-1)^k cot(pi k / n)` for `k = 1 .. n/2 - 1`.
fn first_derivative_weights(grid: &GridSpec) -> Vec<f64> {
    let n = grid.n();
    let scale = PI / grid.period();
    (1..n / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * scale / (PI * k as f64 / n as f64).tan()
        })
        .collect()
}

/// Off-diagonal coefficients of the periodic spectral second-derivative
/// stencil, `-(2 pi / L)^2 (-1)^k / (2 sin^2(pi k / n))` for `k = 1 .. n/2`.
fn second_derivative_weights(grid: &GridSpec) -> Vec<f64> {
    let n = grid.n();
    let scale = (2.0 * PI / grid.period()).powi(2);
    (1..=n / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let s = (PI * k as f64 / n as f64).sin();
            -sign * scale / (2.0 * s * s)
        })
        .collect()
}

/// First derivative along `axis` as a paired circulant sum. Pairing the
/// antisymmetric weights makes constants map to exact zeros and makes the
/// operator commute with index shifts bit-for-bit.
pub(crate) fn diff_axis(grid: &GridSpec, values: &[f64], axis: usize) -> Vec<f64> {
    let w = first_derivative_weights(grid);
    let mut out = vec![0.0; values.len()];
    for_each_line(grid, axis, |idx| {
        let n = idx.len();
        for (p, &i) in idx.iter().enumerate() {
            let mut acc = 0.0;
            for (k, c) in w.iter().enumerate() {
                let k = k + 1;
                let minus = values[idx[(p + n - k) % n]];
                let plus = values[idx[(p + k) % n]];
                acc += c * (minus - plus);
            }
            out[i] = acc;
        }
    });
    out
}

/// Second derivative along `axis`, written in difference form so the
/// diagonal never enters explicitly.
pub(crate) fn second_diff_axis(grid: &GridSpec, values: &[f64], axis: usize) -> Vec<f64> {
    let w = second_derivative_weights(grid);
    let mut out = vec![0.0; values.len()];
    for_each_line(grid, axis, |idx| {
        let n = idx.len();
        let half = n / 2;
        for (p, &i) in idx.iter().enumerate() {
            let centre = values[i];
            let mut acc = 0.0;
            for (k, c) in w.iter().enumerate() {
                let k = k + 1;
                if k == half {
                    acc += c * (values[idx[(p + k) % n]] - centre);
                } else {
                    let minus = values[idx[(p + n - k) % n]] - centre;
                    let plus = values[idx[(p + k) % n]] - centre;
                    acc += c * (minus + plus);
                }
            }
            out[i] = acc;
        }
    });
    out
}

fn for_each_line(grid: &GridSpec, axis: usize, mut f: impl FnMut(&[usize])) {
    let n = grid.n();
    if grid.dim() == 1 {
        let idx: Vec<usize> = (0..n).collect();
        f(&idx);
        return;
    }
    let mut idx = vec![0usize; n];
    for line in 0..n {
        for (p, slot) in idx.iter_mut().enumerate() {
            *slot = if axis == 0 { p * n + line } else { line * n + p };
        }
        f(&idx);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> GridSpec {
        GridSpec::new(1, 2.0 * PI, n).unwrap()
    }

    #[test]
    fn gradient_of_constant_is_exactly_zero() {
        let f = InterfaceField::constant(grid1(64), 3.7).unwrap();
        let g = f.gradient().unwrap();
        assert!(g[0].values().iter().all(|&v| v == 0.0));
        let h = f.hessian().unwrap();
        assert!(h[0].values().iter().all(|&v| v == 0.0));
        let g2 = GridSpec::new(2, 1.0, 16).unwrap();
        let f2 = InterfaceField::constant(g2, -1.25).unwrap();
        for c in f2.gradient().unwrap().iter().chain(f2.hessian().unwrap().iter()) {
            assert!(c.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn gradient_of_sine_on_scaled_torus() {
        let l = 3.0;
        let g = GridSpec::new(1, l, 64).unwrap();
        let k = 2.0 * PI / l;
        let f = InterfaceField::from_fn(g, |x| (k * x[0]).sin()).unwrap();
        let df = &f.gradient().unwrap()[0];
        for i in 0..64 {
            let x = g.coords(i)[0];
            assert!((df.values()[i] - k * (k * x).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn second_derivative_matches_spectral_multiplier() {
        let g = grid1(32);
        let f = InterfaceField::from_fn(g, |x| (3.0 * x[0]).cos() + 0.5 * (7.0 * x[0] + 0.2).sin())
            .unwrap();
        let h = &f.hessian().unwrap()[0];
        let m = f.fourier_multiplier(|xi| -xi[0] * xi[0]).unwrap();
        for i in 0..32 {
            assert!((h.values()[i] - m.values()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_partial_2d() {
        let g = GridSpec::new(2, 2.0 * PI, 16).unwrap();
        let f = InterfaceField::from_fn(g, |x| (x[0]).sin() * (2.0 * x[1]).cos()).unwrap();
        let h = f.hessian().unwrap();
        for i in 0..g.len() {
            let x = g.coords(i);
            let fxy = -2.0 * x[0].cos() * (2.0 * x[1]).sin();
            let fyy = -4.0 * x[0].sin() * (2.0 * x[1]).cos();
            assert!((h[1].values()[i] - fxy).abs() < 1e-10);
            assert!((h[2].values()[i] - fyy).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_identity_and_full_period() {
        let g = grid1(16);
        let f = InterfaceField::from_fn(g, |x| x[0].sin() + 0.1 * (3.0 * x[0]).cos()).unwrap();
        assert_eq!(f.shift(&[0]).unwrap(), f);
        assert_eq!(f.shift(&[16]).unwrap(), f);
        assert_eq!(f.shift(&[-16]).unwrap(), f);
        assert!(matches!(
            f.shift(&[17]),
            Err(MuskatError::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn shift_matches_closed_form() {
        let g = grid1(32);
        let h = g.spacing();
        let f = InterfaceField::from_fn(g, |x| x[0].sin()).unwrap();
        for k in [-16i64, -5, 1, 7, 16] {
            let s = f.shift(&[k]).unwrap();
            for i in 0..32 {
                let x = g.coords(i)[0];
                assert!((s.values()[i] - (x - k as f64 * h).sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn affine_shift_keeps_representation_consistent() {
        let g = grid1(16);
        let f = InterfaceField::zeros(g).with_slope([0.5, 0.0]).unwrap();
        let s = f.shift(&[2]).unwrap();
        let h = g.spacing();
        assert!((s.values()[3] + 0.5 * 2.0 * h).abs() < 1e-15);
        assert_eq!(s.slope(), [0.5, 0.0]);
    }

    #[test]
    fn multiplier_identity_and_eigenfunction() {
        let g = grid1(64);
        let f = InterfaceField::from_fn(g, |x| (5.0 * x[0]).cos()).unwrap();
        let id = f.fourier_multiplier(|_| 1.0).unwrap();
        let abs_d = f.fourier_multiplier(|xi| xi[0].abs()).unwrap();
        for i in 0..64 {
            assert!((id.values()[i] - f.values()[i]).abs() < 1e-12);
            assert!((abs_d.values()[i] - 5.0 * f.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_symbol_is_rejected() {
        let f = InterfaceField::constant(grid1(16), 1.0).unwrap();
        let err = f.fourier_multiplier(|xi| 1.0 / xi[0].abs()).unwrap_err();
        assert!(matches!(err, MuskatError::NonFiniteSymbol { .. }));
    }

    #[test]
    fn invalid_samples_rejected() {
        assert!(InterfaceField::new(grid1(8), vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(InterfaceField::new(grid1(8), v).is_err());
    }
}
