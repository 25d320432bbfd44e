//! The linearized operator L = −A − K acting on perturbations g = f/√μ-style
//! fluctuations f(v) about the Maxwellian.
//!
//!   Ag = ∂_i(σ^{ij}∂_jg) + (∂_iσ^i)g − σ^{ij}(v_i/2)(v_j/2)g
//!   Kg = −μ^{−1/2}∂_i{μ ∫B_{ij}(v, v − v*)μ*^{1/2}((∂_jg)* + (v*_j/2)g*) dv*}
//!
//! Radially symmetric perturbations reduce everything to one dimension and
//! carry the evolution; the 3-D module supplies quadratic forms and oracles
//! on small grids.

mod evolve;
mod grid3d;
mod probe;
mod radial;

pub use evolve::{evolve_radial, fit_stretched_exponential, EvolutionRecord, EvolutionSummary, Preset, StretchedFit};
pub use grid3d::{quadratic_form_l_3d, radial_k_oracle_3d, GridFunction3D, MAX_GRID_3D};
pub use probe::{coercivity_probe, random_probe, CoercivityReport};
pub use radial::{RadialFunction, RadialGrid, RadialOperator};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::MAXWELL_NORM;
use crate::linalg::Vec3;
use crate::quad::GaussLegendre;

/// μ(v) = (2π)^{−3/2}e^{−|v|²/2}.
pub fn maxwellian(v: &Vec3) -> f64 {
    maxwellian_r(crate::linalg::norm(v))
}

pub fn maxwellian_r(r: f64) -> f64 {
    MAXWELL_NORM * (-0.5 * r * r).exp()
}

/// √μ as a function of |v|.
pub fn sqrt_maxwellian_r(r: f64) -> f64 {
    SQRT_MAXWELL_NORM * (-0.25 * r * r).exp()
}

/// (2π)^{−3/4}
pub const SQRT_MAXWELL_NORM: f64 = 0.251_979_435_538_380_7;

/// Parameters of the velocity weight (1 + |v|²)^{ℓ/2}·exp((q/4)(1 + |v|²)^{ϑ/2}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub ell: f64,
    pub theta: f64,
    pub q: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self { ell: 0.0, theta: 1.0, q: 0.5 }
    }
}

impl WeightParams {
    pub fn new(ell: f64, theta: f64, q: f64) -> Result<Self> {
        let p = Self { ell, theta, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.ell.is_finite() {
            return Err(Error::Domain(format!("ell must be finite, got {}", self.ell)));
        }
        if !(0.0..=2.0).contains(&self.theta) {
            return Err(Error::Domain(format!("theta must lie in [0, 2], got {}", self.theta)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::Domain(format!("q must be positive, got {}", self.q)));
        }
        if self.theta == 2.0 && self.q >= 1.0 {
            return Err(Error::Domain("theta = 2 requires q < 1".into()));
        }
        Ok(())
    }

    /// The stretched-exponential decay exponent ϑ/(ϑ + 1).
    pub fn decay_exponent(&self) -> f64 {
        self.theta / (self.theta + 1.0)
    }
}

pub fn weight_w(params: &WeightParams, v: &Vec3) -> Result<f64> {
    params.validate()?;
    Ok(weight_r(params, crate::linalg::norm(v)))
}

pub(crate) fn weight_r(p: &WeightParams, r: f64) -> f64 {
    let s = 1.0 + r * r;
    s.powf(0.5 * p.ell) * (0.25 * p.q * s.powf(0.5 * p.theta)).exp()
}

/// ⟨f, [1, v, |v|²]√μ⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub mass: f64,
    pub momentum: Vec3,
    pub energy: f64,
}

/// Discretization of the velocity domain and of the inner u = v − v* integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub r_max: f64,
    /// Radial cells.
    pub m: usize,
    /// Nodes per axis of the 3-D grid.
    pub n: usize,
    pub u_radial: usize,
    pub u_polar: usize,
    pub u_azimuth: usize,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { r_max: 8.0, m: 160, n: 15, u_radial: 24, u_polar: 16, u_azimuth: 32 }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Domain(format!("r_max must be positive, got {}", self.r_max)));
        }
        if self.m < 8 {
            return Err(Error::Domain(format!("need at least 8 radial cells, got {}", self.m)));
        }
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(Error::Domain(format!("3-D grid size must be odd and ≥ 3, got {}", self.n)));
        }
        if self.u_radial == 0 || self.u_polar == 0 || self.u_azimuth == 0 {
            return Err(Error::Domain("u-quadrature orders must be positive".into()));
        }
        Ok(())
    }

    /// Largest |v_R| the kernel table must cover: corners of the 3-D box.
    pub fn kernel_reach(&self) -> f64 {
        self.r_max * 3f64.sqrt()
    }
}

/// Product rule in spherical coordinates for ∫_{|u|≤u_max} f(u) du. The
/// weights include the Jacobian u², which cancels the 1/|u| of the kernel.
#[derive(Debug, Clone)]
pub(crate) struct USphereRule {
    pub nodes: Vec<(Vec3, f64)>,
}

impl USphereRule {
    pub fn new(cfg: &OperatorConfig) -> Self {
        let u_max = 2.0 * cfg.r_max;
        let radial: Vec<(f64, f64)> = GaussLegendre::new(cfg.u_radial).on(0.0, u_max).collect();
        let polar: Vec<(f64, f64)> = GaussLegendre::new(cfg.u_polar).on(-1.0, 1.0).collect();
        let dphi = 2.0 * PI / cfg.u_azimuth as f64;
        let mut nodes = Vec::with_capacity(radial.len() * polar.len() * cfg.u_azimuth);
        for &(u, wu) in &radial {
            for &(ct, wt) in &polar {
                let st = (1.0 - ct * ct).sqrt();
                for k in 0..cfg.u_azimuth {
                    // Half-step offset keeps nodes off the coordinate planes.
                    let (sp, cp) = ((k as f64 + 0.5) * dphi).sin_cos();
                    nodes.push(([u * st * cp, u * st * sp, u * ct], wu * u * u * wt * dphi));
                }
            }
        }
        Self { nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn maxwellian_values_and_moments() {
        assert_relative_eq!(maxwellian(&[0.0; 3]), 0.063_493_635_934_240_97, max_relative = 1e-15);
        assert_relative_eq!(SQRT_MAXWELL_NORM, MAXWELL_NORM.sqrt(), max_relative = 1e-15);
        let g = RadialGrid::new(8.0, 160).unwrap();
        // Midpoint rule in r; the shell volumes add a uniform O(h²) offset.
        let mid = |i: usize| 4.0 * PI * g.r(i).powi(2) * g.h;
        let mass: f64 = (0..g.m).map(|i| mid(i) * maxwellian_r(g.r(i))).sum();
        let second: f64 = (0..g.m).map(|i| mid(i) * g.r(i).powi(2) * maxwellian_r(g.r(i))).sum();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        assert!((second - 3.0).abs() < 1e-5, "{second}");
        let fv: f64 = (0..g.m).map(|i| g.weight(i) * maxwellian_r(g.r(i))).sum();
        assert!((fv - 1.0).abs() < 3e-4, "{fv}");
    }

    #[test]
    fn weight_examples() {
        let p = WeightParams::new(0.0, 0.0, 0.8).unwrap();
        assert_relative_eq!(weight_w(&p, &[3.0, 1.0, 0.0]).unwrap(), 0.2f64.exp(), max_relative = 1e-15);
        let p = WeightParams::new(2.0, 1.0, 1e-300).unwrap();
        assert_relative_eq!(weight_w(&p, &[1.0, 2.0, 0.0]).unwrap(), 6.0, max_relative = 1e-14);
        let p = WeightParams::new(0.0, 2.0, 0.5).unwrap();
        assert_relative_eq!(weight_w(&p, &[0.0; 3]).unwrap(), 0.125f64.exp(), max_relative = 1e-15);
        assert!(WeightParams::new(0.0, 2.0, 1.0).is_err());
        assert!(WeightParams::new(0.0, 2.5, 0.5).is_err());
        assert!(WeightParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn u_rule_integrates_gaussian() {
        let rule = USphereRule::new(&OperatorConfig::default());
        let s: f64 = rule.nodes.iter().map(|(u, w)| w * maxwellian(u)).sum();
        assert!((s - 1.0).abs() < 1e-8, "{s}");
    }
}
