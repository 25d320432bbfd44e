//! Plasma dispersion function at the normalized Maxwellian.
//!
//! Ψ(x) = Ψ_R(x) + iΨ_I(x) with
//!
//! * Ψ_R(x) = 1 − x·F(x), F(x) = e^{−x²/2} ∫₀ˣ e^{t²/2} dt,
//! * Ψ_I(x) = −√(π/2)·x·e^{−x²/2},
//!
//! and the longitudinal permittivity ε(|k|, x) = 1 + |k|⁻²Ψ(x).

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::config::{PlasmaConfig, DEFAULT_PSI_SWITCH_X};
use crate::error::{Error, Result};
use crate::quad;

/// Complex value of Ψ or ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionValue {
    pub re: f64,
    pub im: f64,
}

impl DispersionValue {
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

// Sampling step of the Dawson sum; aliasing error ~ exp(-(π/2h)²) ≈ 7e-18.
const SAMPLING_STEP: f64 = 0.25;
const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;

/// Classical Dawson integral e^{−y²}∫₀ʸ e^{t²} dt for y ≥ 0 via Rybicki's
/// sampling-theorem sum, written pairwise so that no term cancels and no
/// growing exponential is formed.
fn dawson_sampled(y: f64) -> f64 {
    debug_assert!(y >= 0.0);
    let h = SAMPLING_STEP;
    // Terms with |y - nh| > 7.5 are below 1e-24 relative.
    let n_max = ((y + 7.5) / h).ceil() as i64;
    let mut sum = 0.0;
    let mut n = 1;
    while n <= n_max {
        let nh = n as f64 * h;
        let d = y - nh;
        if d * d < 56.0 {
            sum += (-d * d).exp() * (-(-4.0 * nh * y).exp_m1()) / n as f64;
        }
        n += 2;
    }
    sum * 0.5 * FRAC_2_SQRT_PI
}

/// Asymptotic series Σ (2n−1)!!/x^{2n} for n ≥ `start`, truncated at the
/// smallest term. For x ≥ 10 the truncation error is below 1e-20.
fn asymptotic_tail(x: f64, start: u32) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    let mut sum = 0.0;
    for n in 0..400u32 {
        if n > 0 {
            term *= (2 * n - 1) as f64 * inv2;
        }
        if n >= start {
            if term > prev || (sum != 0.0 && term < 1e-18 * sum) {
                break;
            }
            sum += term;
            prev = term;
        }
    }
    sum
}

/// F(x) = e^{−x²/2}∫₀ˣ e^{t²/2} dt with the default branch switch.
pub fn dawson_scaled(x: f64) -> f64 {
    dawson_scaled_with(x, DEFAULT_PSI_SWITCH_X)
}

/// F(x) with an explicit switch point between the sampled sum (|x| ≤ switch)
/// and the asymptotic expansion F ≈ 1/x + 1/x³ + 3/x⁵ + ….
pub fn dawson_scaled_with(x: f64, switch: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= switch { SQRT_2 * dawson_sampled(ax / SQRT_2) } else { asymptotic_tail(ax, 0) / ax };
    v.copysign(x)
}

/// Ψ(x) = Ψ_R + iΨ_I with the default switch.
pub fn psi(x: f64) -> DispersionValue {
    psi_with(x, DEFAULT_PSI_SWITCH_X)
}

pub fn psi_with(x: f64, switch: f64) -> DispersionValue {
    let ax = x.abs();
    // In the asymptotic regime 1 − xF cancels to O(1/x²); sum the tail directly.
    let re = if ax <= switch { 1.0 - ax * dawson_scaled_with(ax, switch) } else { -asymptotic_tail(ax, 1) };
    DispersionValue { re, im: psi_imag(x) }
}

/// Ψ_I(x) = −√(π/2)·x·e^{−x²/2}.
pub fn psi_imag(x: f64) -> f64 {
    -SQRT_PI_OVER_2 * x * (-0.5 * x * x).exp()
}

/// ε(|k|, x) = 1 + |k|⁻²Ψ(x).
pub fn epsilon(k_mag: f64, x: f64) -> Result<DispersionValue> {
    epsilon_with(k_mag, x, DEFAULT_PSI_SWITCH_X)
}

pub fn epsilon_with(k_mag: f64, x: f64, switch: f64) -> Result<DispersionValue> {
    if !(k_mag > 0.0 && k_mag.is_finite()) {
        return Err(Error::Domain(format!("|k| must be positive, got {k_mag}")));
    }
    let p = psi_with(x, switch);
    let inv = 1.0 / (k_mag * k_mag);
    Ok(DispersionValue { re: 1.0 + inv * p.re, im: inv * p.im })
}

impl PlasmaConfig {
    pub fn psi(&self, x: f64) -> DispersionValue {
        psi_with(x, self.psi_switch_x)
    }

    pub fn epsilon(&self, k_mag: f64, x: f64) -> Result<DispersionValue> {
        epsilon_with(k_mag, x, self.psi_switch_x)
    }
}

/// Largest |x| for which the principal-value quadrature is offered.
pub const PV_ORACLE_MAX_X: f64 = 8.0;

/// Ψ_R by direct principal-value quadrature of
/// 1 − (2π)^{−1/2}·x·P.V.∫ e^{−y²/2}/(x − y) dy.
///
/// The singularity is removed by folding about y = x:
/// P.V.∫ g(y)/(x−y) dy = ∫₀^∞ (g(x−t) − g(x+t))/t dt, and the Gaussian tail
/// beyond t = |x| + 12 is below e^{−72}.
pub fn psi_r_pv_oracle(x: f64, cfg: &PlasmaConfig) -> Result<f64> {
    if !(x.abs() <= PV_ORACLE_MAX_X) {
        return Err(Error::OutOfRange { x, reason: "principal-value oracle is limited to |x| <= 8" });
    }
    let ax = x.abs();
    if ax == 0.0 {
        return Ok(1.0);
    }
    // g(x−t) − g(x+t) = e^{−(x−t)²/2}·(1 − e^{−2xt}), evaluated without cancellation.
    let folded = |t: f64| {
        if t == 0.0 {
            return 2.0 * ax * (-0.5 * ax * ax).exp();
        }
        let d = ax - t;
        (-0.5 * d * d).exp() * (-(-2.0 * ax * t).exp_m1()) / t
    };
    let upper = ax + 12.0;
    let pv = quad::integrate(folded, &[0.0, ax, upper], cfg.tolerance())?;
    Ok(1.0 - ax * pv / (2.0 * PI).sqrt())
}
