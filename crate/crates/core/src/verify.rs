//! Cross-check campaigns: every closed form against an independent oracle,
//! every asymptotic statement against a numeric limit.
//!
//! Targets and tolerances live in [`MANIFEST`]; the command-line tool, the
//! acceptance tests and the README all read them from there. A check passes
//! iff |achieved − target| ≤ tolerance, where a relative entry's tolerance
//! is scaled by |target| before it is written to the report, so the stored
//! `tolerance` is always absolute.
//!
//! Checks of the form "quantity ≤ bound" use target 0 and the bound as an
//! absolute tolerance. Yes/no properties (all probes positive, all runs
//! monotone) report the fraction of successes against target 1 with zero
//! tolerance.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PlasmaConfig;
use crate::dispersion::psi_r_pv_oracle;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frequency::{sigma_k_oracle, FrequencyTable, SMALL_R};
use crate::kernel::{self, jay, jay_oracle, jay_scaled, weights_w, Kernel, XiSplit};
use crate::linalg::{self, Mat3, Vec3};
use crate::operator::{
    coercivity_probe, evolve_radial, quadratic_form_l_3d, radial_k_oracle_3d, random_probe, sqrt_maxwellian_r,
    GridFunction3D, OperatorConfig, Preset, RadialFunction, RadialOperator, WeightParams,
};
use crate::output::{self, Cell};

/// √(8π), the limit of x³e^{−x²/2}J(x).
pub const SQRT_8PI: f64 = 5.013_256_549_262_001;
pub const TWO_PI: f64 = 2.0 * PI;
/// √(8π)·ln 2 = ∫₁₅³⁰ y²e^{−y²/2}J(y) dy in the large-y limit.
pub const SQRT_8PI_LN2: f64 = 3.474_924_642_544_636_6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Absolute,
    Relative,
}

/// Where the target value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Value(f64),
    /// Depends on k₀ or on another computation; the string says which.
    Computed(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Target {
    pub name: &'static str,
    pub reference: Reference,
    pub tolerance: f64,
    pub mode: Mode,
    /// Acceptance criterion this check belongs to, if any.
    pub criterion: Option<u8>,
}

const fn t(name: &'static str, reference: Reference, tolerance: f64, mode: Mode, criterion: Option<u8>) -> Target {
    Target { name, reference, tolerance, mode, criterion }
}

use Mode::{Absolute as Abs, Relative as Rel};
use Reference::{Computed, Value};

pub const MANIFEST: &[Target] = &[
    t("dispersion.parity", Value(0.0), 1e-15, Abs, None),
    t("dispersion.psi_at_zero", Value(1.0), 0.0, Abs, None),
    t("dispersion.pv_oracle_x1", Computed("psi_r(1)"), 1e-7, Abs, None),
    t("dispersion.pv_oracle_sweep", Value(0.0), 1e-7, Abs, None),
    t("dispersion.x2_psi_r_x20", Value(-1.0), 1e-2, Rel, Some(3)),
    t("dispersion.epsilon_nonvanishing", Value(1.0), 0.0, Abs, None),
    t("kernel.jay_vs_oracle", Value(0.0), 1e-7, Abs, Some(1)),
    t("kernel.jay_zero", Computed("2ln(1+k0^2) - 2k0^2/(1+k0^2)"), 1e-8, Abs, Some(1)),
    t("kernel.jay_oracle_zero", Computed("2ln(1+k0^2) - 2k0^2/(1+k0^2)"), 1e-8, Abs, Some(1)),
    t("kernel.jay_asymptote_x12", Value(SQRT_8PI), 2e-2, Rel, Some(2)),
    t("kernel.point_value", Value(0.0), 1e-6, Abs, Some(6)),
    t("kernel.psd_sweep", Value(0.0), 1e-12, Abs, Some(6)),
    t("kernel.null_sweep", Value(0.0), 1e-12, Abs, Some(6)),
    t("kernel.symmetry_sweep", Value(0.0), 1e-12, Abs, Some(6)),
    t("kernel.xi_decomposition", Value(0.0), 1e-12, Abs, None),
    t("kernel.weight_table", Value(0.0), 1e-6, Abs, None),
    t("frequency.lambda_zero_equal", Value(0.0), 1e-8, Abs, Some(4)),
    t("frequency.lambda_zero", Computed("sqrt(pi/2) J(0) / 3"), 1e-8, Abs, Some(4)),
    t("frequency.sigma_oracle_v0", Value(0.0), 1e-3, Abs, Some(4)),
    t("frequency.sigma_oracle_off_axis", Value(0.0), 1e-3, Abs, None),
    t("frequency.small_r_continuity", Value(0.0), 1e-9, Abs, None),
    t("frequency.lambda1_differenced", Value(SQRT_8PI_LN2), 1e-2, Rel, Some(5)),
    t("frequency.r_lambda2_tail", Computed("sqrt(pi/8) int_0^inf e^{-y^2/2} J(y) dy"), 1e-2, Rel, Some(5)),
    t("operator.null_residual_sqrt_mu", Value(0.0), 5e-4, Abs, Some(7)),
    t("operator.null_residual_energy", Value(0.0), 5e-4, Abs, Some(7)),
    t("operator.null_refinement_sqrt_mu", Value(0.0), 0.5, Abs, Some(7)),
    t("operator.null_refinement_energy", Value(0.0), 0.5, Abs, Some(7)),
    t("operator.a_symmetry", Value(0.0), 1e-10, Abs, None),
    t("operator.positivity", Value(0.0), 1e-6, Abs, None),
    t("operator.form_3d_null_sqrt_mu", Value(0.0), 1e-3, Abs, None),
    t("operator.form_3d_null_momentum", Value(0.0), 1e-3, Abs, None),
    t("operator.form_3d_symmetry", Value(0.0), 1e-3, Abs, None),
    t("operator.k_radial_vs_3d", Value(0.0), 2e-2, Abs, Some(8)),
    t("operator.evolve_monotone", Value(1.0), 0.0, Abs, Some(9)),
    t("operator.evolve_mass_drift", Value(0.0), 1e-6, Abs, Some(9)),
    t("operator.evolve_energy_drift", Value(0.0), 1e-6, Abs, Some(9)),
    t("operator.coercivity_positive", Value(1.0), 0.0, Abs, Some(10)),
];

pub fn target(name: &str) -> Option<&'static Target> {
    MANIFEST.iter().find(|t| t.name == name)
}

/// J(0) for cut-off k₀: 2ln(1 + k₀²) − 2k₀²/(1 + k₀²).
pub fn jay_zero_closed_form(k0: f64) -> f64 {
    let s = k0 * k0;
    2.0 * s.ln_1p() - 2.0 * s / (1.0 + s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub target: f64,
    pub achieved: f64,
    /// Absolute tolerance actually applied.
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_s: f64,
}

/// A value that is reported but not asserted (fitted exponents, envelope
/// constants, coercivity extremes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub checks: Vec<CheckReport>,
    pub observations: Vec<Observation>,
}

impl Campaign {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckReport> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn observation(&self, name: &str) -> Option<f64> {
        self.observations.iter().find(|o| o.name == name).map(|o| o.value)
    }

    fn merge(&mut self, other: Campaign) {
        self.checks.extend(other.checks);
        self.observations.extend(other.observations);
    }

    fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.observations.sort_by(|a, b| a.name.cmp(&b.name));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub plasma: PlasmaConfig,
    pub operator: OperatorConfig,
    pub seed: u64,
    pub probes: usize,
    pub t_end: f64,
    /// Overrides of manifest tolerances by check name, in the check's mode.
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            plasma: PlasmaConfig::default(),
            operator: OperatorConfig::default(),
            seed: 7,
            probes: 50,
            t_end: 5.0,
            tolerance_overrides: BTreeMap::new(),
            exec: Exec::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.plasma.validate()?;
        self.operator.validate()?;
        for (name, tol) in &self.tolerance_overrides {
            if target(name).is_none() {
                return Err(Error::Input(format!("no check named {name:?}")));
            }
            if !(*tol >= 0.0) {
                return Err(Error::Input(format!("tolerance for {name} must be nonnegative")));
            }
        }
        if self.probes == 0 {
            return Err(Error::Input("need at least one coercivity probe".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Input(format!("t_end must be positive, got {}", self.t_end)));
        }
        Ok(())
    }

    fn report(&self, name: &str, target_value: Option<f64>, achieved: f64, started: Instant) -> CheckReport {
        let spec = target(name).unwrap_or_else(|| panic!("{name} missing from the manifest"));
        let target = match (spec.reference, target_value) {
            (_, Some(v)) => v,
            (Value(v), None) => v,
            (Computed(what), None) => panic!("{name}: computed target ({what}) not supplied"),
        };
        let tol = self.tolerance_overrides.get(name).copied().unwrap_or(spec.tolerance);
        let tolerance = match spec.mode {
            Abs => tol,
            Rel => tol * target.abs(),
        };
        CheckReport {
            name: name.to_string(),
            target,
            achieved,
            tolerance,
            pass: (achieved - target).abs() <= tolerance,
            runtime_s: started.elapsed().as_secs_f64(),
        }
    }
}

fn obs(name: &str, value: f64) -> Observation {
    Observation { name: name.to_string(), value }
}

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

pub fn check_dispersion(cfg: &VerifyConfig) -> Result<Campaign> {
    let plasma = &cfg.plasma;
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let t0 = Instant::now();
    let parity = max_abs((0..200).map(|_| {
        let x: f64 = rng.gen_range(-30.0..30.0);
        let (a, b) = (plasma.psi(x), plasma.psi(-x));
        (a.re - b.re).abs() + (a.im + b.im).abs()
    }));
    out.push(cfg.report("dispersion.parity", None, parity, t0));

    let t0 = Instant::now();
    out.push(cfg.report("dispersion.psi_at_zero", None, plasma.psi(0.0).re, t0));

    let t0 = Instant::now();
    let oracle = psi_r_pv_oracle(1.0, plasma)?;
    out.push(cfg.report("dispersion.pv_oracle_x1", Some(plasma.psi(1.0).re), oracle, t0));

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..=32 {
        let x = k as f64 * 0.25;
        worst = worst.max((psi_r_pv_oracle(x, plasma)? - plasma.psi(x).re).abs());
    }
    out.push(cfg.report("dispersion.pv_oracle_sweep", None, worst, t0));

    let t0 = Instant::now();
    out.push(cfg.report("dispersion.x2_psi_r_x20", None, 400.0 * plasma.psi(20.0).re, t0));

    let t0 = Instant::now();
    let n = 10_000;
    let mut min_eps = f64::INFINITY;
    let mut nonzero = 0usize;
    for _ in 0..n {
        let k: f64 = rng.gen_range(0.0..plasma.k0);
        let x: f64 = rng.gen_range(-15.0..15.0);
        let e = plasma.epsilon(k, x)?.abs();
        min_eps = min_eps.min(e);
        if e > 0.0 {
            nonzero += 1;
        }
    }
    out.push(cfg.report("dispersion.epsilon_nonvanishing", None, nonzero as f64 / n as f64, t0));

    Ok(Campaign { checks: out, observations: vec![obs("dispersion.epsilon_min_abs", min_eps)] })
}

/// Largest of max(0, −λ_min), |uᵀBu|/|u|² and the v ↔ v* asymmetry, each
/// relative to ‖B‖_F, over `pairs` random (v, v*) in [−4, 4]³.
pub fn kernel_sweeps(kern: &Kernel, pairs: usize, seed: u64) -> Result<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut psd, mut null, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    let mut drawn = 0;
    while drawn < pairs {
        let v: Vec3 = std::array::from_fn(|_| rng.gen_range(-4.0..4.0));
        let vs: Vec3 = std::array::from_fn(|_| rng.gen_range(-4.0..4.0));
        if linalg::norm(&linalg::sub(&v, &vs)) < 1e-6 {
            continue;
        }
        drawn += 1;
        let km = kern.kernel_b(&v, &vs)?;
        let b = km.b_scaled;
        let scale = linalg::frobenius(&b);
        let u = km.frame.u;
        let eig = linalg::sym_eigenvalues(&b);
        let lmin = eig.iter().copied().fold(f64::INFINITY, f64::min);
        psd = psd.max((-lmin / scale).max(0.0));
        null = null.max(linalg::quad_form(&b, &u).abs() / (linalg::dot(&u, &u) * scale));
        // Same u, roles of v and v* exchanged: B(v*, u) at the pair (v*, v* − u).
        let vs2 = linalg::sub(&vs, &u);
        let swapped = kern.kernel_b(&vs, &vs2)?.b_scaled;
        // Both pairs share u and hence v_R, so the scaled matrices compare directly.
        let d = linalg::frobenius(&linalg::mat_sub(&swapped, &b)) / scale;
        sym = sym.max(d);
    }
    Ok((psd, null, sym))
}

pub fn check_kernel(cfg: &VerifyConfig) -> Result<Campaign> {
    let plasma = &cfg.plasma;
    let mut out = Vec::new();
    let mut observations = Vec::new();

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..60 {
        let x = 12.0 * k as f64 / 59.0;
        let a = jay(plasma, x)?;
        let b = jay_oracle(plasma, x)?;
        worst = worst.max(((a - b) / b).abs());
    }
    out.push(cfg.report("kernel.jay_vs_oracle", None, worst, t0));

    let j0 = jay_zero_closed_form(plasma.k0);
    let t0 = Instant::now();
    out.push(cfg.report("kernel.jay_zero", Some(j0), jay(plasma, 0.0)?, t0));
    let t0 = Instant::now();
    out.push(cfg.report("kernel.jay_oracle_zero", Some(j0), jay_oracle(plasma, 0.0)?, t0));

    let t0 = Instant::now();
    let x = 12.0f64;
    out.push(cfg.report("kernel.jay_asymptote_x12", None, x.powi(3) * jay_scaled(plasma, x), t0));

    let t0 = Instant::now();
    let kern = Kernel::new(plasma, cfg.operator.kernel_reach(), cfg.exec);
    let c = PI * j0 / 8.0;
    let b = kern.kernel_b(&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0])?.b;
    let expected: Mat3 = [[0.0, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, c]];
    let dev = max_abs(b.iter().flatten().zip(expected.iter().flatten()).map(|(a, e)| a - e));
    out.push(cfg.report("kernel.point_value", None, dev, t0));

    let t0 = Instant::now();
    let (psd, null, sym) = kernel_sweeps(&kern, 1000, cfg.seed)?;
    let elapsed = t0.elapsed().as_secs_f64() / 3.0;
    for (name, value) in [("kernel.psd_sweep", psd), ("kernel.null_sweep", null), ("kernel.symmetry_sweep", sym)] {
        let mut r = cfg.report(name, None, value, Instant::now());
        r.runtime_s = elapsed;
        out.push(r);
    }

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v: Vec3 = std::array::from_fn(|_| rng.gen_range(-4.0..4.0));
        let vs: Vec3 = std::array::from_fn(|_| rng.gen_range(-4.0..4.0));
        let frame = kernel::RelVelFrame::new(&v, &vs)?;
        if let XiSplit::Split { xi1, xi2 } = kernel::xi_matrices(&frame, &v) {
            let sum = linalg::mat_add(&xi1, &xi2);
            let proj = linalg::perp_projector(&frame.u_hat);
            worst = worst.max(max_abs(linalg::mat_sub(&sum, &proj).iter().flatten().copied()));
        }
    }
    out.push(cfg.report("kernel.xi_decomposition", None, worst, t0));

    let t0 = Instant::now();
    let err = kern.table().max_interpolation_error(cfg.exec);
    out.push(cfg.report("kernel.weight_table", None, err, t0));

    // Envelope constants: ŵ(1 + r)^{15/4} from above over r ∈ [1, 8], and
    // e^{−r²/4}(1 + r)^{−3}/min ŵ from below (q = 1/2) over r ∈ [0, 8].
    let mut upper = 0.0f64;
    let mut lower = 0.0f64;
    for k in 0..=160 {
        let r = 8.0 * k as f64 / 160.0;
        let w = weights_w(plasma, r)?;
        if r >= 1.0 {
            upper = upper.max(w.w1_scaled.max(w.w2_scaled) * (1.0 + r).powf(3.75));
        }
        let wmin = w.w1_scaled.min(w.w2_scaled);
        lower = lower.max((-0.25 * r * r).exp() * (1.0 + r).powi(-3) / wmin);
    }
    observations.push(obs("kernel.envelope_upper_c_delta", upper));
    observations.push(obs("kernel.envelope_lower_c_q", lower));
    observations.push(obs("kernel.jay_asymptote_ratio_x12", x.powi(3) * jay_scaled(plasma, x) / SQRT_8PI));

    Ok(Campaign { checks: out, observations })
}

/// Relative Frobenius error of the tabulated σ against the k-space oracle.
pub fn sigma_oracle_error(freq: &FrequencyTable, v: &Vec3, exec: Exec) -> Result<f64> {
    let fast = freq.sigma_matrix(v)?;
    let slow = sigma_k_oracle(freq.config(), v, exec)?;
    Ok(linalg::frobenius(&linalg::mat_sub(&fast, &slow)) / linalg::frobenius(&slow))
}

pub fn check_frequency(cfg: &VerifyConfig) -> Result<Campaign> {
    let plasma = &cfg.plasma;
    let mut out = Vec::new();

    let t0 = Instant::now();
    let freq = FrequencyTable::new(plasma, cfg.exec)?;
    let p0 = freq.lambda_pair(0.0)?;
    out.push(cfg.report("frequency.lambda_zero_equal", None, p0.lambda1 - p0.lambda2, t0));
    let expect = (PI / 2.0).sqrt() * jay_zero_closed_form(plasma.k0) / 3.0;
    let t0 = Instant::now();
    out.push(cfg.report("frequency.lambda_zero", Some(expect), p0.lambda1, t0));

    let t0 = Instant::now();
    let e0 = sigma_oracle_error(&freq, &[0.0, 0.0, 0.0], cfg.exec)?;
    out.push(cfg.report("frequency.sigma_oracle_v0", None, e0, t0));

    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for v in [[1.0, 0.0, 0.0], [0.0, 2.0, 1.0], [3.0, 3.0, 0.0]] {
        worst = worst.max(sigma_oracle_error(&freq, &v, cfg.exec)?);
    }
    out.push(cfg.report("frequency.sigma_oracle_off_axis", None, worst, t0));

    let t0 = Instant::now();
    let below = freq.lambda_pair(SMALL_R * (1.0 - 1e-9))?;
    let above = freq.lambda_pair(SMALL_R * (1.0 + 1e-9))?;
    let jump = (below.lambda1 - above.lambda1).abs().max((below.lambda2 - above.lambda2).abs());
    out.push(cfg.report("frequency.small_r_continuity", None, jump, t0));

    let t0 = Instant::now();
    let (_, i15) = freq.moments(15.0)?;
    let (_, i30) = freq.moments(30.0)?;
    out.push(cfg.report("frequency.lambda1_differenced", None, i30 - i15, t0));

    let t0 = Instant::now();
    let constant = freq.lambda2_asymptotic_constant()?;
    let r = 100.0;
    let tail = r * freq.lambda_pair(r)?.lambda2;
    out.push(cfg.report("frequency.r_lambda2_tail", Some(constant), tail, t0));

    Ok(Campaign {
        checks: out,
        observations: vec![
            obs("frequency.lambda_zero", p0.lambda1),
            obs("frequency.lambda2_asymptotic_constant", constant),
        ],
    })
}

/// A radial Gaussian bump, e^{−|v|²}.
fn bump(r: f64) -> f64 {
    (-r * r).exp()
}

/// Relative L² distance between radial K applied to e^{−|v|²} and the 3-D
/// oracle on the n³ grid, over the nodes with |v| ≤ r_max − h.
pub fn radial_vs_3d(op: &RadialOperator, exec: Exec) -> Result<f64> {
    let cfg = op.config;
    let g = RadialFunction::from_fn(op.grid, bump);
    let kg = op.apply_k(&g)?;
    let gg = |v: &Vec3| -> (f64, Vec3) {
        let e = bump(linalg::norm(v));
        (e, linalg::scale(v, -2.0 * e))
    };
    let oracle = radial_k_oracle_3d(&gg, cfg.n, op.kernel(), &cfg, 1e-3, exec)?;
    let h3 = oracle.h();
    let radial_at = |r: f64| {
        let grid = op.grid;
        let s = r / grid.h - 0.5;
        if s <= 0.0 {
            // Even in r: a + b r² through the first two cells.
            let (r0, r1) = (grid.r(0), grid.r(1));
            let b = (kg.values[1] - kg.values[0]) / (r1 * r1 - r0 * r0);
            return kg.values[0] + b * (r * r - r0 * r0);
        }
        let i = s.floor() as usize;
        if i + 1 >= grid.m {
            return kg.values[grid.m - 1];
        }
        let f = s - i as f64;
        kg.values[i] * (1.0 - f) + kg.values[i + 1] * f
    };
    let (mut num, mut den) = (0.0, 0.0);
    for idx in 0..oracle.len() {
        let r = linalg::norm(&oracle.node(idx));
        if r > cfg.r_max - h3 {
            continue;
        }
        let a = radial_at(r);
        let b = oracle.values[idx];
        num += (a - b).powi(2);
        den += b * b;
    }
    Ok((num / den).sqrt())
}

fn build_operator(cfg: &VerifyConfig) -> Result<(RadialOperator, f64)> {
    let t0 = Instant::now();
    let op = RadialOperator::new(&cfg.plasma, &cfg.operator, cfg.exec)?;
    Ok((op, t0.elapsed().as_secs_f64()))
}

/// Null-space residuals at M and 2M, plus symmetry of A.
pub fn operator_null(cfg: &VerifyConfig) -> Result<Campaign> {
    let (op, build) = build_operator(cfg)?;
    let mut out = Vec::new();

    let t0 = Instant::now();
    let [n1, n2] = op.null_modes();
    let r1 = op.null_residual(&n1)?;
    let r2 = op.null_residual(&n2)?;
    for (name, value) in [("operator.null_residual_sqrt_mu", r1), ("operator.null_residual_energy", r2)] {
        let mut r = cfg.report(name, None, value, t0);
        r.runtime_s += build;
        out.push(r);
    }

    let t0 = Instant::now();
    let fine_cfg = OperatorConfig { m: 2 * cfg.operator.m, ..cfg.operator };
    let fine = RadialOperator::from_tables(op.frequency().clone(), op.kernel().clone(), &fine_cfg, cfg.exec)?;
    let [f1, f2] = fine.null_modes();
    let q1 = fine.null_residual(&f1)? / r1;
    let q2 = fine.null_residual(&f2)? / r2;
    out.push(cfg.report("operator.null_refinement_sqrt_mu", None, q1, t0));
    out.push(cfg.report("operator.null_refinement_energy", None, q2, t0));

    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probes: Vec<RadialFunction> = (0..4)
        .map(|_| {
            let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            RadialFunction::from_fn(op.grid, |r| (c[0] + c[1] * r + c[2] * r * r) * sqrt_maxwellian_r(r))
        })
        .collect();
    let mut asym = 0.0f64;
    for a in &probes {
        let aa = op.apply_a(a)?;
        for b in &probes {
            let ab = op.apply_a(b)?;
            let scale = aa.norm() * b.norm() + ab.norm() * a.norm();
            asym = asym.max((aa.inner(b) - ab.inner(a)).abs() / scale);
        }
    }
    out.push(cfg.report("operator.a_symmetry", None, asym, t0));

    // L itself is only approximately self-adjoint on the grid: K is assembled
    // from face fluxes of an interpolated field.
    let m = op.grid.m;
    let l = op.l_matrix();
    let w = |i: usize| op.grid.weight(i);
    let mut lsym = 0.0f64;
    let mut lscale = 0.0f64;
    for i in 0..m {
        lscale = lscale.max(w(i) * l[i * m + i].abs());
        for j in 0..m {
            lsym = lsym.max((w(i) * l[i * m + j] - w(j) * l[j * m + i]).abs());
        }
    }

    Ok(Campaign {
        checks: out,
        observations: vec![
            obs("operator.null_residual_refined_sqrt_mu", q1 * r1),
            obs("operator.null_residual_refined_energy", q2 * r2),
            obs("operator.l_weighted_asymmetry", lsym / lscale),
        ],
    })
}

/// Radial K against the 3-D oracle.
pub fn operator_oracle(cfg: &VerifyConfig) -> Result<Campaign> {
    let (op, _) = build_operator(cfg)?;
    let t0 = Instant::now();
    let rel = radial_vs_3d(&op, cfg.exec)?;
    Ok(Campaign { checks: vec![cfg.report("operator.k_radial_vs_3d", None, rel, t0)], observations: Vec::new() })
}

/// Every preset evolved to t_end for ϑ ∈ {1, 2}.
pub fn operator_evolution(cfg: &VerifyConfig) -> Result<Campaign> {
    let (op, build) = build_operator(cfg)?;
    let mut observations = Vec::new();
    let t0 = Instant::now();
    let dt = op.max_stable_dt();
    let mut runs = 0usize;
    let mut monotone = 0usize;
    let (mut mass, mut energy) = (0.0f64, 0.0f64);
    for preset in Preset::ALL {
        let f0 = preset.initial(&op);
        for theta in [1.0, 2.0] {
            let params = WeightParams::new(0.0, theta, 0.5)?;
            let s = evolve_radial(&op, &f0, &params, dt, cfg.t_end)?;
            runs += 1;
            if s.monotone_l2 {
                monotone += 1;
            }
            mass = mass.max(s.mass_drift);
            energy = energy.max(s.energy_drift);
            let p = s.fit.map(|f| f.p).unwrap_or(f64::NAN);
            let tag = format!("operator.evolve.{}.theta{}", preset.name(), theta as u32);
            observations.push(obs(&format!("{tag}.fitted_p"), p));
            observations.push(obs(&format!("{tag}.theta_target"), s.theta_target));
        }
    }
    let elapsed = t0.elapsed().as_secs_f64() + build;
    let checks = [
        ("operator.evolve_monotone", monotone as f64 / runs as f64),
        ("operator.evolve_mass_drift", mass),
        ("operator.evolve_energy_drift", energy),
    ]
    .into_iter()
    .map(|(name, value)| {
        let mut r = cfg.report(name, None, value, Instant::now());
        r.runtime_s = elapsed;
        r
    })
    .collect();
    Ok(Campaign { checks, observations })
}

/// ⟨Lg, g⟩/|g|²_σ over random probes orthogonal to the null space.
pub fn operator_coercivity(cfg: &VerifyConfig) -> Result<Campaign> {
    let (op, build) = build_operator(cfg)?;
    let t0 = Instant::now();
    let probe = coercivity_probe(&op, cfg.probes, cfg.seed)?;
    let positive = probe.ratios.iter().filter(|&&x| x > 0.0).count();
    let mut r = cfg.report("operator.coercivity_positive", None, positive as f64 / probe.samples as f64, t0);
    r.runtime_s += build;
    Ok(Campaign {
        checks: vec![r],
        observations: vec![obs("operator.coercivity_min", probe.min), obs("operator.coercivity_max", probe.max)],
    })
}

/// ⟨Lg, g⟩ ≥ −tol·|g|²_σ on random probes that keep their null component,
/// and the empirical C in |⟨Kg, g⟩| ≤ |g|²_σ + C‖g‖².
pub fn operator_positivity(cfg: &VerifyConfig) -> Result<Campaign> {
    let (op, build) = build_operator(cfg)?;
    let t0 = Instant::now();
    let unit = WeightParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let [mu, energy] = op.null_modes();
    let mut worst = 0.0f64;
    let mut k_const = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut g = random_probe(&op, &mut rng);
        for i in 0..g.values.len() {
            g.values[i] += a * mu.values[i] + b * energy.values[i];
        }
        let sigma = op.norm_sigma(&g, &unit, false);
        let lg = op.apply_l(&g)?.inner(&g);
        worst = worst.max((-lg / sigma).max(0.0));
        let kg = op.apply_k(&g)?.inner(&g);
        k_const = k_const.max((kg.abs() - sigma) / g.norm().powi(2));
    }
    let mut r = cfg.report("operator.positivity", None, worst, t0);
    r.runtime_s += build;
    Ok(Campaign { checks: vec![r], observations: vec![obs("operator.k_bound_constant", k_const)] })
}

/// The 3-D quadratic form on the n³ grid: collision invariants and symmetry.
pub fn operator_form_3d(cfg: &VerifyConfig) -> Result<Campaign> {
    let t0 = Instant::now();
    let freq = FrequencyTable::new(&cfg.plasma, cfg.exec)?;
    let kern = Kernel::new(&cfg.plasma, cfg.operator.kernel_reach(), cfg.exec);
    let (n, r_max) = (cfg.operator.n, cfg.operator.r_max);
    let q = |a: &GridFunction3D, b: &GridFunction3D| quadratic_form_l_3d(a, b, &freq, &kern, &cfg.operator, cfg.exec);
    let sm = |v: &Vec3| sqrt_maxwellian_r(linalg::norm(v));
    let mut out = Vec::new();

    let mu = GridFunction3D::from_fn(n, r_max, sm)?;
    out.push(cfg.report("operator.form_3d_null_sqrt_mu", None, q(&mu, &mu)?, t0));

    let t0 = Instant::now();
    let mom = GridFunction3D::from_fn(n, r_max, |v| v[0] * sm(v))?;
    out.push(cfg.report("operator.form_3d_null_momentum", None, q(&mom, &mom)?, t0));

    let t0 = Instant::now();
    let g1 = GridFunction3D::from_fn(n, r_max, |v| (-(linalg::norm(v) - 1.0).powi(2)).exp())?;
    let g2 = GridFunction3D::from_fn(n, r_max, |v| (1.0 + v[0] - v[1] * v[2]) * (-0.5 * linalg::dot(v, v)).exp())?;
    let (a, b) = (q(&g1, &g2)?, q(&g2, &g1)?);
    let scale = (q(&g1, &g1)? * q(&g2, &g2)?).sqrt();
    out.push(cfg.report("operator.form_3d_symmetry", None, (a - b).abs() / scale, t0));

    let energy = GridFunction3D::from_fn(n, r_max, |v| linalg::dot(v, v) * sm(v))?;
    let e = q(&energy, &energy)? / energy.norm().powi(2);
    Ok(Campaign { checks: out, observations: vec![obs("operator.form_3d_energy_mode", e)] })
}

pub fn check_operator(cfg: &VerifyConfig) -> Result<Campaign> {
    let mut all = operator_null(cfg)?;
    all.merge(operator_oracle(cfg)?);
    all.merge(operator_evolution(cfg)?);
    all.merge(operator_coercivity(cfg)?);
    all.merge(operator_positivity(cfg)?);
    all.merge(operator_form_3d(cfg)?);
    Ok(all)
}

/// The checks belonging to acceptance criterion `n` (1 to 10), with the
/// observations of the campaign that produced them.
pub fn check_criterion(n: u8, cfg: &VerifyConfig) -> Result<Campaign> {
    cfg.validate()?;
    let mut c = match n {
        1 | 2 | 6 => check_kernel(cfg)?,
        3 => check_dispersion(cfg)?,
        4 | 5 => check_frequency(cfg)?,
        7 => operator_null(cfg)?,
        8 => operator_oracle(cfg)?,
        9 => operator_evolution(cfg)?,
        10 => operator_coercivity(cfg)?,
        _ => return Err(Error::Input(format!("no acceptance criterion {n}"))),
    };
    c.checks.retain(|r| target(&r.name).and_then(|t| t.criterion) == Some(n));
    c.sort();
    Ok(c)
}

/// All four campaigns, merged and sorted by name.
pub fn run_all(cfg: &VerifyConfig) -> Result<Campaign> {
    cfg.validate()?;
    let groups: [fn(&VerifyConfig) -> Result<Campaign>; 4] =
        [check_dispersion, check_kernel, check_frequency, check_operator];
    let results = cfg.exec.map(groups.len(), |i| groups[i](cfg));
    let mut all = Campaign { checks: Vec::new(), observations: Vec::new() };
    for r in results {
        all.merge(r?);
    }
    all.sort();
    Ok(all)
}

pub const REPORT_HEADER: [&str; 6] = ["name", "target", "achieved", "tolerance", "pass", "runtime_s"];

pub fn report_json(checks: &[CheckReport]) -> Result<String> {
    output::to_json(checks)
}

pub fn report_csv(checks: &[CheckReport]) -> Result<String> {
    let rows: Vec<Vec<Cell>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.as_str().into(),
                c.target.into(),
                c.achieved.into(),
                c.tolerance.into(),
                c.pass.into(),
                c.runtime_s.into(),
            ]
        })
        .collect();
    let mut buf = Vec::new();
    output::write_csv(&mut buf, &REPORT_HEADER, &rows)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// Reference constants consumed by the figure scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConstants {
    pub sqrt_8pi: f64,
    pub two_pi: f64,
    pub sqrt_8pi_ln2: f64,
    /// ϑ/(ϑ + 1) keyed by ϑ.
    pub decay_exponents: BTreeMap<String, f64>,
    pub jay_zero: f64,
    pub lambda_zero: f64,
    pub kernel_point_c: f64,
    pub k0: f64,
}

impl ReferenceConstants {
    pub fn new(k0: f64) -> Self {
        let j0 = jay_zero_closed_form(k0);
        let decay_exponents =
            [1.0, 2.0].into_iter().map(|theta: f64| (format!("{theta}"), theta / (theta + 1.0))).collect();
        Self {
            sqrt_8pi: SQRT_8PI,
            two_pi: TWO_PI,
            sqrt_8pi_ln2: SQRT_8PI_LN2,
            decay_exponents,
            jay_zero: j0,
            lambda_zero: (PI / 2.0).sqrt() * j0 / 3.0,
            kernel_point_c: PI * j0 / 8.0,
            k0,
        }
    }
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    constants: ReferenceConstants,
    checks: &'a [Target],
}

/// The manifest JSON: reference constants and every target with its
/// tolerance.
pub fn manifest_json(k0: f64) -> Result<String> {
    output::to_json(&ManifestFile { constants: ReferenceConstants::new(k0), checks: MANIFEST })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_names_unique_and_reference_constants() {
        let mut names: Vec<_> = MANIFEST.iter().map(|t| t.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), MANIFEST.len());
        assert!((SQRT_8PI - (8.0 * PI).sqrt()).abs() < 1e-15);
        assert!((SQRT_8PI_LN2 - (8.0 * PI).sqrt() * 2f64.ln()).abs() < 1e-15);
        let c = ReferenceConstants::new(1.0);
        assert!((c.jay_zero - 0.386_294_361_119_890_6).abs() < 1e-15);
        assert!((c.lambda_zero - 0.161_382_727_985_606).abs() < 1e-15);
        assert!((c.kernel_point_c - 0.151_697_440_877_176_38).abs() < 1e-15);
        assert_eq!(c.decay_exponents["2"], 2.0 / 3.0);
        // k₀ = 2 limit: 2ln5 − 8/5.
        assert!((jay_zero_closed_form(2.0) - (2.0 * 5f64.ln() - 1.6)).abs() < 1e-14);
    }

    #[test]
    fn pass_follows_tolerance() {
        let cfg = VerifyConfig::default();
        let r = cfg.report("dispersion.x2_psi_r_x20", None, -1.005, Instant::now());
        assert!(r.pass && (r.tolerance - 1e-2).abs() < 1e-18);
        let r = cfg.report("dispersion.x2_psi_r_x20", None, -1.02, Instant::now());
        assert!(!r.pass);
        let mut strict = VerifyConfig::default();
        strict.tolerance_overrides.insert("dispersion.x2_psi_r_x20".into(), 1e-9);
        let r = strict.report("dispersion.x2_psi_r_x20", None, -1.005, Instant::now());
        assert!(!r.pass);
        strict.tolerance_overrides.insert("no.such.check".into(), 1.0);
        assert!(strict.validate().is_err());
    }

    #[test]
    fn dispersion_campaign_passes() {
        let c = check_dispersion(&VerifyConfig::default()).unwrap();
        for r in &c.checks {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn report_emitters() {
        let checks = vec![CheckReport {
            name: "a".into(),
            target: 1.0,
            achieved: 1.0,
            tolerance: 0.0,
            pass: true,
            runtime_s: 0.5,
        }];
        let csv = report_csv(&checks).unwrap();
        assert!(csv.starts_with("name,target,achieved,tolerance,pass,runtime_s\n"));
        let json: serde_json::Value = serde_json::from_str(&report_json(&checks).unwrap()).unwrap();
        let keys: Vec<_> = json[0].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 6);
        for k in REPORT_HEADER {
            assert!(json[0].get(k).is_some());
        }
        let m: serde_json::Value = serde_json::from_str(&manifest_json(1.0).unwrap()).unwrap();
        assert_eq!(m["constants"]["sqrt_8pi"].as_f64().unwrap(), SQRT_8PI);
    }
}
