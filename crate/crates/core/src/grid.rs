use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MuskatError, Result};

/// Uniform periodic grid on the torus `[0, L)^d`, standing in for `R^d`.
///
/// Samples are stored row-major with axis 0 outermost, so in two dimensions
/// the flat index of `(i, j)` is `i * n + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    period: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, period: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(MuskatError::InvalidGrid(format!(
                "interface dimension must be 1 or 2, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(MuskatError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(MuskatError::InvalidGrid(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        Ok(Self { dim, period, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Volume of one cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of samples, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fundamental wavenumber `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Signed integer frequency of FFT bin `idx` along one axis. The Nyquist
    /// bin maps to `+n/2`.
    pub fn freq_index(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    /// Multi-index of a flat index.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    /// Flat index of `x - offset` (periodic), i.e. the sample read by a shift.
    #[inline]
    pub fn offset_index(&self, flat: usize, offset: [i64; 2]) -> usize {
        let n = self.n as i64;
        if self.dim == 1 {
            (flat as i64 - offset[0]).rem_euclid(n) as usize
        } else {
            let i = (flat / self.n) as i64;
            let j = (flat % self.n) as i64;
            let ii = (i - offset[0]).rem_euclid(n) as usize;
            let jj = (j - offset[1]).rem_euclid(n) as usize;
            ii * self.n + jj
        }
    }

    /// Physical coordinates of a sample.
    pub fn coords(&self, flat: usize) -> [f64; 2] {
        let h = self.spacing();
        let idx = self.unflatten(flat);
        [idx[0] as f64 * h, idx[1] as f64 * h]
    }

    /// Physical wavevector of a spectral bin (flat index into the spectrum).
    pub fn wavevector(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let dk = self.dk();
        if self.dim == 1 {
            [self.freq_index(idx[0]) as f64 * dk, 0.0]
        } else {
            [
                self.freq_index(idx[0]) as f64 * dk,
                self.freq_index(idx[1]) as f64 * dk,
            ]
        }
    }

    /// Integer frequency vector of a spectral bin.
    pub fn frequency(&self, flat: usize) -> [i64; 2] {
        let idx = self.unflatten(flat);
        if self.dim == 1 {
            [self.freq_index(idx[0]), 0]
        } else {
            [self.freq_index(idx[0]), self.freq_index(idx[1])]
        }
    }

    /// True when some component of the bin sits on the Nyquist frequency.
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        self.is_nyquist(idx[0]) || (self.dim == 2 && self.is_nyquist(idx[1]))
    }

    /// Same grid rescaled to period `period / lambda`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.dim, self.period / lambda, self.n)
    }

    pub fn refined(&self) -> Result<Self> {
        Self::new(self.dim, self.period, self.n * 2)
    }

    pub fn describe(&self) -> String {
        format!("d={} L={} N={}", self.dim, self.period, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::new(1, 1.0, 4).is_err());
        assert!(GridSpec::new(1, 1.0, 24).is_err());
        assert!(GridSpec::new(3, 1.0, 16).is_err());
        assert!(GridSpec::new(1, 0.0, 16).is_err());
        assert!(GridSpec::new(2, 2.0, 16).is_ok());
    }

    #[test]
    fn offset_index_wraps() {
        let g = GridSpec::new(2, 1.0, 8).unwrap();
        let flat = g.flatten([0, 7]);
        assert_eq!(g.unflatten(g.offset_index(flat, [1, -1])), [7, 0]);
        let g1 = GridSpec::new(1, 1.0, 8).unwrap();
        assert_eq!(g1.offset_index(2, [8, 0]), 2);
        assert_eq!(g1.offset_index(2, [-4, 0]), 6);
    }

    #[test]
    fn frequencies_are_signed() {
        let g = GridSpec::new(1, 2.0 * PI, 8).unwrap();
        let f: Vec<i64> = (0..8).map(|i| g.freq_index(i)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }
}
