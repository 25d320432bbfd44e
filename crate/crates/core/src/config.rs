use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Tolerance;

/// Threshold above which the Dawson-type function switches from the sampled
/// sum to its asymptotic expansion.
pub const DEFAULT_PSI_SWITCH_X: f64 = 10.0;

/// Wavenumber cut-off and numerical tolerances shared by every evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaConfig {
    pub k0: f64,
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    pub psi_switch_x: f64,
}

impl Default for PlasmaConfig {
    fn default() -> Self {
        Self { k0: 1.0, quad_rel_tol: 1e-10, quad_abs_tol: 1e-14, psi_switch_x: DEFAULT_PSI_SWITCH_X }
    }
}

impl PlasmaConfig {
    pub fn with_k0(k0: f64) -> Result<Self> {
        let cfg = Self { k0, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return Err(Error::Domain(format!("k0 must be positive and finite, got {}", self.k0)));
        }
        for (name, t) in [("quad_rel_tol", self.quad_rel_tol), ("quad_abs_tol", self.quad_abs_tol)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1), got {t}")));
            }
        }
        if !(self.psi_switch_x.is_finite() && self.psi_switch_x > 0.0) {
            return Err(Error::Domain(format!("psi_switch_x must be positive, got {}", self.psi_switch_x)));
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.quad_rel_tol, self.quad_abs_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_cutoff_and_tolerances() {
        assert!(PlasmaConfig::with_k0(0.0).is_err());
        assert!(PlasmaConfig::with_k0(f64::INFINITY).is_err());
        assert!(PlasmaConfig::with_k0(-1.0).is_err());
        let cfg = PlasmaConfig { quad_rel_tol: 1.5, ..PlasmaConfig::default() };
        assert!(cfg.validate().is_err());
        assert!(PlasmaConfig::default().validate().is_ok());
    }
}
