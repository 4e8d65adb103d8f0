//! Initial-data generators for experiments and tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MuskatError, Result};
use crate::field::InterfaceField;
use crate::grid::GridSpec;

/// Serializable description of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialData {
    Constant { value: f64 },
    Cosine { k: f64, amplitude: f64 },
    RandomSmooth { seed: u64, max_mode: usize, amplitude: f64 },
    SmallSlope { seed: u64, max_mode: usize, slope: f64 },
    Monotone { slope: f64, ripple: f64, k: usize, phase: f64 },
    Kink { amplitude: f64, cells: f64 },
    Bump { amplitude: f64, width: f64 },
    AbsSine { amplitude: f64, exponent: f64 },
}

impl InitialData {
    pub fn build(&self, grid: GridSpec) -> Result<InterfaceField> {
        match *self {
            InitialData::Constant { value } => InterfaceField::constant(grid, value),
            InitialData::Cosine { k, amplitude } => cosine(grid, k, amplitude),
            InitialData::RandomSmooth {
                seed,
                max_mode,
                amplitude,
            } => random_smooth(grid, seed, max_mode, amplitude),
            InitialData::SmallSlope {
                seed,
                max_mode,
                slope,
            } => small_slope(grid, seed, max_mode, slope),
            InitialData::Monotone {
                slope,
                ripple,
                k,
                phase,
            } => monotone(grid, slope, ripple, k, phase),
            InitialData::Kink { amplitude, cells } => kink(grid, amplitude, cells),
            InitialData::Bump { amplitude, width } => bump(grid, amplitude, width),
            InitialData::AbsSine { amplitude, exponent } => abs_sine(grid, amplitude, exponent),
        }
    }
}

fn base_wavenumber(grid: &GridSpec) -> f64 {
    2.0 * PI / grid.period()
}

/// `amplitude cos(k k0 x)` along the first axis, `k0 = 2 pi / L`.
pub fn cosine(grid: GridSpec, k: f64, amplitude: f64) -> Result<InterfaceField> {
    let k0 = base_wavenumber(&grid);
    InterfaceField::from_fn(grid, |x| amplitude * (k * k0 * x[0]).cos())
}

/// Random trigonometric polynomial with modes up to `max_mode` and
/// coefficients of size `1/|k|^2`, scaled so that `max |f| = amplitude`.
pub fn random_smooth(grid: GridSpec, seed: u64, max_mode: usize, amplitude: f64) -> Result<InterfaceField> {
    if max_mode == 0 || max_mode >= grid.n() / 3 {
        return Err(MuskatError::InvalidParameter(format!(
            "max_mode must lie in [1, N/3), got {max_mode}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k0 = base_wavenumber(&grid);
    let m = max_mode as i64;
    let mut terms = Vec::new();
    let (lo, hi) = if grid.dim() == 1 { (0, 0) } else { (-m, m) };
    for a in 0..=m {
        for b in lo..=hi {
            if a == 0 && b <= 0 {
                continue;
            }
            let r2 = (a * a + b * b) as f64;
            if r2 > (m * m) as f64 {
                continue;
            }
            let c: f64 = rng.gen_range(-1.0..1.0);
            let s: f64 = rng.gen_range(-1.0..1.0);
            terms.push(([a as f64 * k0, b as f64 * k0], c / r2, s / r2));
        }
    }
    let f = InterfaceField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, c, s)| {
                let ph = k[0] * x[0] + k[1] * x[1];
                c * ph.cos() + s * ph.sin()
            })
            .sum()
    })?;
    let peak = f.max_abs();
    f.scale(amplitude / peak)
}

/// Random smooth data scaled so that `max |grad f| = slope`.
pub fn small_slope(grid: GridSpec, seed: u64, max_mode: usize, slope: f64) -> Result<InterfaceField> {
    let f = random_smooth(grid, seed, max_mode, 1.0)?;
    let lip = crate::norms::lip(&f)?.aggregate;
    f.scale(slope / lip)
}

/// Affine-mode profile `a x + (ripple a / k') sin(k' x + phase)` with
/// `k' = k k0`; monotone when `|ripple| < 1`.
pub fn monotone(grid: GridSpec, slope: f64, ripple: f64, k: usize, phase: f64) -> Result<InterfaceField> {
    if grid.dim() != 1 {
        return Err(MuskatError::InvalidParameter("monotone profiles are one-dimensional".into()));
    }
    if !(ripple.abs() < 1.0) || k == 0 {
        return Err(MuskatError::InvalidParameter(format!(
            "ripple must satisfy |ripple| < 1 and k >= 1, got {ripple}, {k}"
        )));
    }
    let kk = k as f64 * base_wavenumber(&grid);
    InterfaceField::from_fn(grid, |x| ripple * slope / kk * (kk * x[0] + phase).sin())?.with_slope([slope, 0.0])
}

/// Triangle wave of slope `+-amplitude` (kinks at `0` and `L/2`), convolved
/// with a Gaussian of width `cells * h`.
pub fn kink(grid: GridSpec, amplitude: f64, cells: f64) -> Result<InterfaceField> {
    let l = grid.period();
    let tri = |x: f64| {
        let y = x.rem_euclid(l);
        amplitude * (0.25 * l - (y - 0.5 * l).abs())
    };
    let raw = InterfaceField::from_fn(grid, |x| {
        if grid.dim() == 1 {
            tri(x[0])
        } else {
            tri(x[0]) + tri(x[1])
        }
    })?;
    let w = cells * grid.spacing();
    raw.fourier_multiplier(|xi| (-0.5 * w * w * (xi[0] * xi[0] + xi[1] * xi[1])).exp())
}

/// Periodized Gaussian bump centred at `L/2` (each axis).
pub fn bump(grid: GridSpec, amplitude: f64, width: f64) -> Result<InterfaceField> {
    let l = grid.period();
    InterfaceField::from_fn(grid, |x| {
        let mut r2 = 0.0;
        for &xi in x.iter().take(grid.dim()) {
            let mut best = f64::INFINITY;
            for n in -1..=1 {
                best = best.min((xi - 0.5 * l + n as f64 * l).abs());
            }
            r2 += best * best;
        }
        amplitude * (-0.5 * r2 / (width * width)).exp()
    })
}

/// `amplitude |sin(k0 x)|^exponent` (summed over axes in 2D); `C^1` but not
/// `C^2` for exponents in `(1, 2)`.
pub fn abs_sine(grid: GridSpec, amplitude: f64, exponent: f64) -> Result<InterfaceField> {
    if !(exponent > 0.0) {
        return Err(MuskatError::InvalidParameter(format!(
            "exponent must be positive, got {exponent}"
        )));
    }
    let k0 = base_wavenumber(&grid);
    InterfaceField::from_fn(grid, |x| {
        (0..grid.dim())
            .map(|a| amplitude * (k0 * x[a]).sin().abs().powf(exponent))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_respect_their_scales() {
        let g = GridSpec::new(1, 2.0 * PI, 128).unwrap();
        let f = random_smooth(g, 3, 8, 0.7).unwrap();
        assert!((f.max_abs() - 0.7).abs() < 1e-12);
        let s = small_slope(g, 4, 8, 0.1).unwrap();
        assert!((crate::norms::lip(&s).unwrap().aggregate - 0.1).abs() < 1e-12);
        let m = monotone(g, 2.0, 0.5, 3, 0.2).unwrap();
        let grad = m.gradient().unwrap();
        assert!(grad[0].values().iter().all(|&v| v >= 1.0 - 1e-9));
        let k = kink(g, 1.0, 2.0).unwrap();
        assert!(crate::norms::lip(&k).unwrap().aggregate <= 1.0 + 1e-9);
        assert!(random_smooth(g, 1, 64, 1.0).is_err());
    }
}
