//! Radial cutoff profiles `chi` used to excise wavelengths below `mu2`.

use serde::{Deserialize, Serialize};

use crate::error::{MuskatError, Result};

/// Smooth radial cutoff with `chi(r) = 1` on `[0, 1]`, `chi(r) = 0` on
/// `[2, inf)` and `-2 <= chi'(r) <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `chi(r) = 1 - S(r - 1)` on `(1, 2)` with the quintic smoothstep
    /// `S(u) = 6u^5 - 15u^4 + 10u^3`; steepest slope is `15/8`.
    #[default]
    Quintic,
}

fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

fn smoothstep_derivative(u: f64) -> f64 {
    30.0 * u * u * (u - 1.0) * (u - 1.0)
}

/// `int_0^v S(u) du`.
fn smoothstep_integral(v: f64) -> f64 {
    let v4 = v * v * v * v;
    v4 * (2.5 + v * (-3.0 + v))
}

impl CutoffProfile {
    pub fn id(&self) -> &'static str {
        match self {
            CutoffProfile::Quintic => "quintic",
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(MuskatError::InvalidParameter(format!(
                "cutoff radius must be nonnegative, got {r}"
            )));
        }
        Ok(self.eval_unchecked(r))
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(MuskatError::InvalidParameter(format!(
                "cutoff radius must be nonnegative, got {r}"
            )));
        }
        Ok(match self {
            CutoffProfile::Quintic => {
                if r <= 1.0 || r >= 2.0 {
                    0.0
                } else {
                    -smoothstep_derivative(r - 1.0)
                }
            }
        })
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        match self {
            CutoffProfile::Quintic => {
                if r <= 1.0 {
                    1.0
                } else if r >= 2.0 {
                    0.0
                } else {
                    1.0 - smoothstep(r - 1.0)
                }
            }
        }
    }

    /// `X(s) = int_0^s chi(r) dr`, used for cell-integrated cutoff weights.
    pub fn integral(&self, s: f64) -> f64 {
        match self {
            CutoffProfile::Quintic => {
                if s <= 1.0 {
                    s.max(0.0)
                } else if s >= 2.0 {
                    1.5
                } else {
                    let v = s - 1.0;
                    1.0 + v - smoothstep_integral(v)
                }
            }
        }
    }

    /// `int_a^b (1 - chi(r / mu)) dr` for `0 <= a <= b`.
    pub fn complement_integral(&self, a: f64, b: f64, mu: f64) -> f64 {
        if mu <= 0.0 || a >= 2.0 * mu {
            return b - a;
        }
        if b <= mu {
            return 0.0;
        }
        (b - a) - mu * (self.integral(b / mu) - self.integral(a / mu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reference_values() {
        let c = CutoffProfile::Quintic;
        assert_eq!(c.eval(0.5).unwrap(), 1.0);
        assert_eq!(c.eval(3.0).unwrap(), 0.0);
        assert!((c.eval(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((c.derivative(1.5).unwrap() + 15.0 / 8.0).abs() < 1e-14);
        assert!(c.eval(-0.1).is_err());
    }

    #[test]
    fn slope_bounds_hold_on_a_fine_sweep() {
        let c = CutoffProfile::Quintic;
        for i in 0..=4000 {
            let r = i as f64 * 1e-3;
            let d = c.derivative(r).unwrap();
            assert!((-2.0..=0.0).contains(&d));
            let v = c.eval(r).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn integral_matches_midpoint_quadrature() {
        let c = CutoffProfile::Quintic;
        for &s in &[0.3, 1.0, 1.37, 1.9, 2.5] {
            let m = 200_000;
            let h = s / m as f64;
            let q: f64 = (0..m).map(|i| c.eval_unchecked((i as f64 + 0.5) * h) * h).sum();
            assert!((q - c.integral(s)).abs() < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn continuously_differentiable_at_joins() {
        let c = CutoffProfile::Quintic;
        for &r in &[1.0, 2.0] {
            let e = 1e-7;
            let left = (c.eval_unchecked(r) - c.eval_unchecked(r - e)) / e;
            let right = (c.eval_unchecked(r + e) - c.eval_unchecked(r)) / e;
            assert!(left.abs() < 1e-6 && right.abs() < 1e-6);
        }
    }
}
