//! Explicit RK4 for ∂f/∂t + Lf = 0 on radial perturbations.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{sqrt_maxwellian_r, RadialFunction, RadialOperator, WeightParams};
use crate::error::{Error, Result};

/// Stability bound dt ≤ CFL·h²/max λ.
pub const CFL: f64 = 0.4;
/// Largest admissible |⟨f₀, e⟩|/(|f₀|·|e|) for the collision invariants e.
pub const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    GaussianBump,
    Shell,
    HermiteMode,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::GaussianBump, Preset::Shell, Preset::HermiteMode];

    pub fn name(self) -> &'static str {
        match self {
            Preset::GaussianBump => "gaussian_bump",
            Preset::Shell => "shell",
            Preset::HermiteMode => "hermite_mode",
        }
    }

    pub fn profile(self, r: f64) -> f64 {
        match self {
            Preset::GaussianBump => (-r * r).exp(),
            Preset::Shell => (-2.0 * (r - 2.5).powi(2)).exp(),
            Preset::HermiteMode => {
                let r2 = r * r;
                (r2 * r2 - 10.0 * r2 + 15.0) * sqrt_maxwellian_r(r)
            }
        }
    }

    /// The preset with its collision-invariant component removed.
    pub fn initial(self, op: &RadialOperator) -> RadialFunction {
        op.remove_null(&RadialFunction::from_fn(op.grid, |r| self.profile(r)))
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown preset {s:?}; expected gaussian_bump, shell or hermite_mode")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    /// |f|₀
    pub l2: f64,
    /// |f|_ϑ = (∫w²f²)^{1/2}
    pub weighted: f64,
    /// |f|_{σ,ϑ}
    pub sigma_norm: f64,
}

/// log|f|₀ ≈ a − λt^p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedFit {
    pub p: f64,
    pub lambda: f64,
    pub a: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub records: Vec<EvolutionRecord>,
    pub dt: f64,
    pub steps: usize,
    /// max over steps of |⟨f, √μ⟩ − ⟨f₀, √μ⟩|/(|f₀|·|√μ|), likewise for energy.
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub monotone_l2: bool,
    pub monotone_weighted: bool,
    pub fit: Option<StretchedFit>,
    pub theta_target: f64,
}

/// Integrate ∂f/∂t = −(I − P)L(I − P)f from `f0` to `t_end`.
///
/// The projection keeps the collision invariants exactly conserved; on the
/// continuum it is the identity since L is self-adjoint with null space
/// range(P). Every step is recorded.
pub fn evolve_radial(
    op: &RadialOperator,
    f0: &RadialFunction,
    params: &WeightParams,
    dt: f64,
    t_end: f64,
) -> Result<EvolutionSummary> {
    params.validate()?;
    f0.validate()?;
    if f0.grid != op.grid {
        return Err(Error::Input("initial data lives on a different grid".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Input(format!("t_end must be nonnegative, got {t_end}")));
    }
    let bound = op.max_stable_dt();
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::StepSize { dt, bound });
    }
    let [e_mass, e_energy] = op.null_modes();
    let n0 = f0.norm();
    let (m0, en0) = f0.moments();
    let scale_m = n0 * e_mass.norm();
    let scale_e = n0 * e_energy.norm();
    if n0 > 0.0 && (m0.abs() > MOMENT_TOL * scale_m || en0.abs() > MOMENT_TOL * scale_e) {
        return Err(Error::Input(format!(
            "initial data must have zero mass and energy (got {m0:e}, {en0:e}); remove the null component first"
        )));
    }

    let m = op.grid.m;
    let l = op.l_matrix();
    let basis = op.null_basis();
    let project = |x: &mut [f64]| {
        for q in basis {
            let c: f64 = (0..m).map(|i| op.grid.weight(i) * x[i] * q[i]).sum();
            for i in 0..m {
                x[i] -= c * q[i];
            }
        }
    };
    let rhs = |x: &[f64]| -> Vec<f64> {
        let mut y = x.to_vec();
        project(&mut y);
        let mut out: Vec<f64> =
            (0..m).map(|i| -l[i * m..(i + 1) * m].iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()).collect();
        project(&mut out);
        out
    };

    let steps = if t_end == 0.0 { 0 } else { (t_end / dt).ceil() as usize };
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let record = |t: f64, f: &RadialFunction| {
        let (mass, energy) = f.moments();
        EvolutionRecord {
            t,
            mass,
            energy,
            l2: f.norm(),
            weighted: f.weighted_norm(params),
            sigma_norm: op.norm_sigma(f, params, true).sqrt(),
        }
    };
    let mut f = f0.clone();
    let mut records = Vec::with_capacity(steps + 1);
    records.push(record(0.0, &f));
    for k in 0..steps {
        let x = &f.values;
        let k1 = rhs(x);
        let x2: Vec<f64> = (0..m).map(|i| x[i] + 0.5 * h * k1[i]).collect();
        let k2 = rhs(&x2);
        let x3: Vec<f64> = (0..m).map(|i| x[i] + 0.5 * h * k2[i]).collect();
        let k3 = rhs(&x3);
        let x4: Vec<f64> = (0..m).map(|i| x[i] + h * k3[i]).collect();
        let k4 = rhs(&x4);
        for i in 0..m {
            f.values[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        records.push(record((k + 1) as f64 * h, &f));
    }

    let drift = |sel: fn(&EvolutionRecord) -> f64, start: f64, scale: f64| {
        if scale == 0.0 {
            return 0.0;
        }
        records.iter().map(|r| (sel(r) - start).abs() / scale).fold(0.0, f64::max)
    };
    let mass_drift = drift(|r| r.mass, m0, scale_m);
    let energy_drift = drift(|r| r.energy, en0, scale_e);
    let monotone =
        |sel: fn(&EvolutionRecord) -> f64| records.windows(2).all(|w| sel(&w[1]) <= sel(&w[0]) * (1.0 + 1e-13));
    let monotone_l2 = monotone(|r| r.l2);
    let monotone_weighted = monotone(|r| r.weighted);
    let fit = fit_stretched_exponential(
        &records.iter().map(|r| r.t).collect::<Vec<_>>(),
        &records.iter().map(|r| r.l2).collect::<Vec<_>>(),
    );
    Ok(EvolutionSummary {
        records,
        dt: h,
        steps,
        mass_drift,
        energy_drift,
        monotone_l2,
        monotone_weighted,
        fit,
        theta_target: params.decay_exponent(),
    })
}

/// Least-squares fit of log y ≈ a − λt^p: linear in (a, λ) for each p on a
/// grid over [0.05, 2]. None when fewer than three positive samples exist.
pub fn fit_stretched_exponential(t: &[f64], y: &[f64]) -> Option<StretchedFit> {
    let pts: Vec<(f64, f64)> = t.iter().zip(y).filter(|(_, &y)| y > 0.0).map(|(&t, &y)| (t, y.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let mut best: Option<StretchedFit> = None;
    for k in 0..=390 {
        let p = 0.05 + 0.005 * k as f64;
        let n = pts.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(t, ly) in &pts {
            let x = t.powf(p);
            sx += x;
            sy += ly;
            sxx += x * x;
            sxy += x * ly;
        }
        let det = n * sxx - sx * sx;
        if det.abs() < 1e-300 {
            continue;
        }
        let slope = (n * sxy - sx * sy) / det;
        let a = (sy - slope * sx) / n;
        let rss: f64 = pts.iter().map(|&(t, ly)| (ly - a - slope * t.powf(p)).powi(2)).sum();
        if best.is_none_or(|b| rss < b.rss) {
            best = Some(StretchedFit { p, lambda: -slope, a, rss });
        }
    }
    best
}
