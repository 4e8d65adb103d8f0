//! Discrete Fourier transforms on a [`GridSpec`].
//!
//! Forward transforms are unnormalized; [`inverse`] divides by `n^d`, so
//! `inverse(forward(f)) == f` up to rounding.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::GridSpec;

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

fn transform_in_place(grid: &GridSpec, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let fft = plan(n, forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if grid.dim() == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    // rows (axis 1 contiguous)
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    // columns
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        fft.process_with_scratch(&mut col, &mut scratch);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
}

pub fn forward(grid: &GridSpec, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(grid, &mut data, true);
    data
}

pub fn inverse(grid: &GridSpec, spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut data = spectrum.to_vec();
    transform_in_place(grid, &mut data, false);
    let scale = 1.0 / grid.len() as f64;
    for z in &mut data {
        *z *= scale;
    }
    data
}

pub fn inverse_real(grid: &GridSpec, spectrum: &[Complex64]) -> Vec<f64> {
    inverse(grid, spectrum).into_iter().map(|z| z.re).collect()
}

/// `sum |F_k|^2 * w(k)` converted to the continuous `L^2` normalization:
/// `||f||_2^2 = (L^d / n^{2d}) * sum |F_k|^2`.
pub fn spectral_energy(grid: &GridSpec, spectrum: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
    let norm = grid.period().powi(grid.dim() as i32) / (grid.len() as f64).powi(2);
    let mut acc = crate::summation::CompensatedSum::new();
    for (k, z) in spectrum.iter().enumerate() {
        acc.add(z.norm_sqr() * weight(k));
    }
    acc.value() * norm
}

/// Keep only bins whose integer frequency satisfies the 2/3 rule on every axis.
pub fn two_thirds_mask(grid: &GridSpec, flat: usize) -> bool {
    let cutoff = (grid.n() / 3) as i64;
    let f = grid.frequency(flat);
    f[0].abs() <= cutoff && f[1].abs() <= cutoff
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let g = GridSpec::new(2, 1.0, 8).unwrap();
        let v: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let back = inverse_real(&g, &forward(&g, &v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_lands_in_its_bin() {
        let g = GridSpec::new(1, 2.0 * std::f64::consts::PI, 16).unwrap();
        let v: Vec<f64> = (0..16).map(|i| (3.0 * g.coords(i)[0]).cos()).collect();
        let s = forward(&g, &v);
        assert!((s[3].re - 8.0).abs() < 1e-12);
        assert!((s[13].re - 8.0).abs() < 1e-12);
        assert!(s[5].norm() < 1e-12);
    }
}
