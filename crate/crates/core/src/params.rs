use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffProfile;
use crate::error::{MuskatError, Result};

/// Regularization pair: viscosity `mu1` and cutoff length `mu2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    pub mu1: f64,
    pub mu2: f64,
    #[serde(default)]
    pub cutoff: CutoffProfile,
}

impl RegParams {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        let p = Self {
            mu1,
            mu2,
            cutoff: CutoffProfile::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(MuskatError::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Largest `mu2` for which the `L^2` growth bound is asserted.
    pub fn l2_mu2_limit(mu1: f64) -> f64 {
        (0.5 * mu1).powf(1.5)
    }

    /// `mu2 <= (mu1 / 2)^{3/2}`.
    pub fn l2_assertion_armed(&self) -> bool {
        self.mu2 <= Self::l2_mu2_limit(self.mu1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_and_arming() {
        assert!(RegParams::new(0.0, 0.1).is_err());
        assert!(RegParams::new(0.1, 1.5).is_err());
        let p = RegParams::new(0.1, 0.01).unwrap();
        assert!(p.l2_assertion_armed());
        let q = RegParams::new(0.1, 0.05).unwrap();
        assert!(!q.l2_assertion_armed());
    }
}
