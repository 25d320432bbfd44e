//! The Balescu–Lenard kernel at Maxwellian.
//!
//! B(v, v − v*) = (ξ¹w₁(|v_R|) + ξ²w₂(|v_R|)) / |v − v*| where
//! w₁, w₂ are angular averages of J(x) = ∫₀^{k₀} 4ρ³/((ρ² + Ψ_R)² + Ψ_I²) dρ.
//!
//! J grows like √(8π)e^{x²/2}/x³, so everything consumed downstream goes
//! through the scaled forms J̃ = e^{−x²/2}J and ŵ = e^{−r²/2}w.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::config::PlasmaConfig;
use crate::dispersion::DispersionValue;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::interp::{EvenGrid, RightEdge};
use crate::linalg::{self, Mat3, Vec3};
use crate::quad::{self, GaussLegendre};

/// Largest |x| for which the unscaled J is returned.
pub const JAY_MAX_X: f64 = 25.0;
/// |v_R| below which the ξ split is replaced by the isotropic projector.
pub const SINGULAR_TOL: f64 = 1e-8;
/// Gauss–Legendre order for the θ integrals of w₁, w₂.
pub const THETA_ORDER: usize = 64;

const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;

/// log((k₀² + Ψ_R)² + Ψ_I²) − log(Ψ_R² + Ψ_I²) and the arctangent term
/// 2(Ψ_R/Ψ_I)(atan(Ψ_R/Ψ_I) − atan((k₀² + Ψ_R)/Ψ_I)), the latter returned as
/// `coef · angle` with `coef = −2Ψ_R/|Ψ_I|` so callers can absorb e^{−x²/2}.
struct JayTerms {
    log_term: f64,
    /// Some(angle) when Ψ_I is resolvable; None on the removable singularity.
    angle: Option<f64>,
    limit: f64,
    psi: DispersionValue,
}

fn jay_terms(cfg: &PlasmaConfig, x: f64) -> JayTerms {
    let ax = x.abs();
    let psi = cfg.psi(ax);
    let k2 = cfg.k0 * cfg.k0;
    let im = -psi.im; // ≥ 0 for x ≥ 0
    let re = psi.re;
    let num = (k2 + re).powi(2) + im * im;
    let den = re * re + im * im;
    let log_term = (num / den).ln();
    // For x ≥ 0 both arguments sit in the right half-plane, so the difference
    // of arctangents is the argument of (im − i·re)(im + i(k₀² + re)).
    let angle = if re > 0.0 && im < 1e-12 * (re + k2) { None } else { Some((im * k2).atan2(im * im + re * (k2 + re))) };
    JayTerms { log_term, angle, limit: -2.0 * k2 / (k2 + re), psi }
}

/// Closed form of J(x); errors beyond |x| = 25 where e^{x²/2} leaves f64.
pub fn jay(cfg: &PlasmaConfig, x: f64) -> Result<f64> {
    if !(x.abs() <= JAY_MAX_X) {
        return Err(Error::OutOfRange { x, reason: "J(x) overflows beyond |x| = 25; use jay_scaled" });
    }
    let t = jay_terms(cfg, x);
    let arc = match t.angle {
        Some(a) => -2.0 * t.psi.re / (-t.psi.im) * a,
        None => t.limit,
    };
    Ok(t.log_term + arc)
}

/// J̃(x) = e^{−x²/2}J(x), using e^{−x²/2}/|Ψ_I| = 1/(√(π/2)|x|).
pub fn jay_scaled(cfg: &PlasmaConfig, x: f64) -> f64 {
    let ax = x.abs();
    let t = jay_terms(cfg, ax);
    let g = (-0.5 * ax * ax).exp();
    let arc = match t.angle {
        Some(a) => -2.0 * t.psi.re * a / (SQRT_PI_OVER_2 * ax),
        None => g * t.limit,
    };
    g * t.log_term + arc
}

/// J(x) by adaptive quadrature, independent of the closed form.
///
/// With s = ρ² and t = s + Ψ_R the integrand becomes 2(t − Ψ_R)/(t² + Ψ_I²)
/// on [Ψ_R, k₀² + Ψ_R]. When that interval straddles t = 0 the Lorentzian
/// peak (width |Ψ_I|, which is below 1e-30 for x ≳ 12) is resolved with
/// t = |Ψ_I|·sinh z, giving the bounded integrand 2 tanh z − 2Ψ_R sech z/|Ψ_I|.
pub fn jay_oracle(cfg: &PlasmaConfig, x: f64) -> Result<f64> {
    if !(x.abs() <= JAY_MAX_X) {
        return Err(Error::OutOfRange { x, reason: "J(x) overflows beyond |x| = 25" });
    }
    let psi = cfg.psi(x.abs());
    let (re, im) = (psi.re, psi.im.abs());
    let k0 = cfg.k0;
    let lo = re;
    let hi = k0 * k0 + re;
    let tol = cfg.tolerance();
    if lo < 0.0 && hi > 0.0 {
        let za = (lo / im).asinh();
        let zb = (hi / im).asinh();
        let f = |z: f64| 2.0 * z.tanh() - 2.0 * re / (im * z.cosh());
        quad::integrate(f, &[za, 0.0, zb], tol)
    } else {
        let f = |rho: f64| {
            let r2 = rho * rho;
            4.0 * r2 * rho / ((r2 + re).powi(2) + im * im)
        };
        quad::integrate(f, &[0.0, 0.5 * k0, k0], tol)
    }
}

/// Angular weights and their e^{−r²/2}-scaled companions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w1_scaled: f64,
    pub w2_scaled: f64,
}

fn weights_scaled_with(cfg: &PlasmaConfig, r: f64, gl: &GaussLegendre) -> (f64, f64) {
    let mut a = 0.0;
    let mut b = 0.0;
    for (theta, w) in gl.on(0.0, FRAC_PI_2) {
        let (s, c) = theta.sin_cos();
        let rs = r * s;
        let val = w * jay_scaled(cfg, r * c) * (-0.5 * rs * rs).exp();
        a += s * s * val;
        b += c * c * val;
    }
    (a, b)
}

/// w₁(r) = ∫₀^{π/2} sin²θ J(r cos θ) dθ and w₂ with cos²θ, by 64-point
/// Gauss–Legendre checked against the 128-point rule.
pub fn weights_w(cfg: &PlasmaConfig, r: f64) -> Result<Weights> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("|v_R| must be nonnegative, got {r}")));
    }
    let (a, b) = weights_scaled_with(cfg, r, &GaussLegendre::new(THETA_ORDER));
    let (a2, b2) = weights_scaled_with(cfg, r, &GaussLegendre::new(2 * THETA_ORDER));
    let err = (a - a2).abs().max((b - b2).abs());
    if err > 1e-9 * a2.abs().min(b2.abs()) {
        return Err(Error::Tolerance { estimate: a2, error: err, tolerance: 1e-9 });
    }
    let g = (0.5 * r * r).exp();
    Ok(Weights { w1: a * g, w2: b * g, w1_scaled: a, w2_scaled: b })
}

/// Tabulated ŵ₁, ŵ₂ on a uniform grid with cubic interpolation; beyond the
/// table the quadrature is evaluated directly.
#[derive(Debug, Clone)]
pub struct WeightTable {
    cfg: PlasmaConfig,
    grid: EvenGrid,
    w1: Vec<f64>,
    w2: Vec<f64>,
    gl: GaussLegendre,
}

pub const WEIGHT_TABLE_POINTS: usize = 400;

impl WeightTable {
    pub fn build(cfg: &PlasmaConfig, r_max: f64, exec: Exec) -> Self {
        let n = WEIGHT_TABLE_POINTS;
        let h = r_max / (n - 1) as f64;
        let grid = EvenGrid::new(0.0, h, n, RightEdge::Shift);
        let gl = GaussLegendre::new(THETA_ORDER);
        let vals = exec.map(n, |i| weights_scaled_with(cfg, grid.node(i), &gl));
        let (w1, w2) = vals.into_iter().unzip();
        Self { cfg: *cfg, grid, w1, w2, gl }
    }

    pub fn r_max(&self) -> f64 {
        self.grid.end()
    }

    pub fn config(&self) -> &PlasmaConfig {
        &self.cfg
    }

    /// (ŵ₁, ŵ₂) at |v_R| = r.
    pub fn scaled(&self, r: f64) -> (f64, f64) {
        if r > self.grid.end() {
            return weights_scaled_with(&self.cfg, r, &self.gl);
        }
        let mut a = 0.0;
        let mut b = 0.0;
        for (k, w) in self.grid.stencil(r) {
            if let Some(k) = k {
                a += w * self.w1[k];
                b += w * self.w2[k];
            }
        }
        (a, b)
    }

    /// Worst relative interpolation error at the cell midpoints.
    pub fn max_interpolation_error(&self, exec: Exec) -> f64 {
        let errs = exec.map(self.grid.n - 1, |i| {
            let r = self.grid.node(i) + 0.5 * self.grid.h;
            let (a, b) = self.scaled(r);
            let (ea, eb) = weights_scaled_with(&self.cfg, r, &self.gl);
            ((a - ea) / ea).abs().max(((b - eb) / eb).abs())
        });
        errs.into_iter().fold(0.0, f64::max)
    }
}

/// Frame attached to the relative velocity u = v − v*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelVelFrame {
    pub u: Vec3,
    pub u_mag: f64,
    pub u_hat: Vec3,
    pub v_par: f64,
    pub vstar_par: f64,
    /// v − (û·v)û, the part of v perpendicular to u.
    pub v_r: Vec3,
    pub v_r_mag: f64,
    pub plane_basis: (Vec3, Vec3),
}

impl RelVelFrame {
    pub fn new(v: &Vec3, vstar: &Vec3) -> Result<Self> {
        let u = linalg::sub(v, vstar);
        let u_mag = linalg::norm(&u);
        if !(u_mag > 0.0) {
            return Err(Error::Singular);
        }
        let u_hat = linalg::scale(&u, 1.0 / u_mag);
        let v_par = linalg::dot(&u_hat, v);
        let vstar_par = linalg::dot(&u_hat, vstar);
        let v_r = linalg::sub(v, &linalg::scale(&u_hat, v_par));
        let v_r_mag = linalg::norm(&v_r);
        Ok(Self {
            u,
            u_mag,
            u_hat,
            v_par,
            vstar_par,
            v_r,
            v_r_mag,
            plane_basis: linalg::orthonormal_complement(&u_hat),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiSplit {
    Split {
        xi1: Mat3,
        xi2: Mat3,
    },
    /// |v_R| below [`SINGULAR_TOL`]; w₁ = w₂ there and B = w₁(0)(I − ûûᵀ)/|u|.
    Degenerate,
}

/// ξ² = p̂p̂ᵀ with p = (v·u¹)u¹ + (v·u²)u², ξ¹ = q̂q̂ᵀ with
/// q = (u²·v)u¹ − (u¹·v)u².
pub fn xi_matrices(frame: &RelVelFrame, v: &Vec3) -> XiSplit {
    if frame.v_r_mag < SINGULAR_TOL {
        return XiSplit::Degenerate;
    }
    let (u1, u2) = frame.plane_basis;
    let a = linalg::dot(&u1, v);
    let b = linalg::dot(&u2, v);
    let inv = 1.0 / a.hypot(b);
    let p = [(a * u1[0] + b * u2[0]) * inv, (a * u1[1] + b * u2[1]) * inv, (a * u1[2] + b * u2[2]) * inv];
    let q = [(b * u1[0] - a * u2[0]) * inv, (b * u1[1] - a * u2[1]) * inv, (b * u1[2] - a * u2[2]) * inv];
    XiSplit::Split { xi1: linalg::outer(&q, &q), xi2: linalg::outer(&p, &p) }
}

/// Kernel matrix at a (v, v*) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMatrix {
    pub b: Mat3,
    /// e^{−|v_R|²/2}·b
    pub b_scaled: Mat3,
    pub frame: RelVelFrame,
}

fn assemble(frame: &RelVelFrame, split: &XiSplit, w1: f64, w2: f64) -> Mat3 {
    let m = match split {
        XiSplit::Split { xi1, xi2 } => linalg::mat_add(&linalg::mat_scale(xi1, w1), &linalg::mat_scale(xi2, w2)),
        XiSplit::Degenerate => linalg::mat_scale(&linalg::perp_projector(&frame.u_hat), w1),
    };
    linalg::mat_scale(&m, 1.0 / frame.u_mag)
}

/// The kernel evaluator: a cut-off plus the tabulated weights.
#[derive(Debug, Clone)]
pub struct Kernel {
    table: WeightTable,
}

impl Kernel {
    /// Table covering |v_R| ≤ `r_max`.
    pub fn new(cfg: &PlasmaConfig, r_max: f64, exec: Exec) -> Self {
        Self { table: WeightTable::build(cfg, r_max, exec) }
    }

    pub fn config(&self) -> &PlasmaConfig {
        self.table.config()
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    /// B(v, v − v*).
    pub fn kernel_b(&self, v: &Vec3, vstar: &Vec3) -> Result<KernelMatrix> {
        let frame = RelVelFrame::new(v, vstar)?;
        let split = xi_matrices(&frame, v);
        let (a, b) = self.table.scaled(frame.v_r_mag);
        let g = (0.5 * frame.v_r_mag * frame.v_r_mag).exp();
        Ok(KernelMatrix { b: assemble(&frame, &split, a * g, b * g), b_scaled: assemble(&frame, &split, a, b), frame })
    }

    /// B with the weights forced to the given constants.
    pub fn kernel_b_with_weights(v: &Vec3, vstar: &Vec3, w1: f64, w2: f64) -> Result<Mat3> {
        let frame = RelVelFrame::new(v, vstar)?;
        let split = xi_matrices(&frame, v);
        Ok(assemble(&frame, &split, w1, w2))
    }

    /// B(v, v − v*)·√(μ(v)μ(v*)) with the exponentials fused:
    /// √(μμ*)·e^{|v_R|²/2} = (2π)^{−3/2}·exp(−(v_∥² + v*_∥²)/4).
    pub fn kernel_b_times_sqrt_mumu(&self, v: &Vec3, vstar: &Vec3) -> Result<Mat3> {
        let u = linalg::sub(v, vstar);
        let u_mag = linalg::norm(&u);
        if !(u_mag > 0.0) {
            return Err(Error::Singular);
        }
        Ok(self.fused(v, &u, u_mag))
    }

    /// Hot-path form of [`Kernel::kernel_b_times_sqrt_mumu`] for a known u = v − v*.
    pub(crate) fn fused(&self, v: &Vec3, u: &Vec3, u_mag: f64) -> Mat3 {
        let inv_u = 1.0 / u_mag;
        let uh = [u[0] * inv_u, u[1] * inv_u, u[2] * inv_u];
        let v_par = linalg::dot(&uh, v);
        let vs_par = v_par - u_mag;
        let p = [v[0] - v_par * uh[0], v[1] - v_par * uh[1], v[2] - v_par * uh[2]];
        let r = linalg::norm(&p);
        let (w1, w2) = self.table.scaled(r);
        let pref = MAXWELL_NORM * (-0.25 * (v_par * v_par + vs_par * vs_par)).exp() * inv_u;
        let mut m = [[0.0; 3]; 3];
        // ξ¹ = I − ûûᵀ − ξ², so B̃ = w₁(I − ûûᵀ) + (w₂ − w₁)p̂p̂ᵀ.
        let dw = if r < SINGULAR_TOL { 0.0 } else { (w2 - w1) / (r * r) };
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                m[i][j] = pref * (w1 * (delta - uh[i] * uh[j]) + dw * p[i] * p[j]);
            }
        }
        m
    }
}

/// (2π)^{−3/2}
pub const MAXWELL_NORM: f64 = 0.063_493_635_934_240_97;

/// Landau kernel (L/|u|)(I − ûûᵀ).
pub fn landau_kernel(v: &Vec3, vstar: &Vec3, l_const: f64) -> Result<Mat3> {
    let frame = RelVelFrame::new(v, vstar)?;
    Ok(linalg::mat_scale(&linalg::perp_projector(&frame.u_hat), l_const / frame.u_mag))
}

/// ∫_{S²} ωωᵀ δ(ω·u) dω evaluated on the great circle ⊥ û with `n` points;
/// equals π(I − ûûᵀ)/|u|.
pub fn sphere_delta_moment(u: &Vec3, n: usize) -> Mat3 {
    let u_mag = linalg::norm(u);
    let uh = linalg::scale(u, 1.0 / u_mag);
    let (a, b) = linalg::orthonormal_complement(&uh);
    let mut m = linalg::ZERO;
    let dphi = 2.0 * PI / n as f64;
    for k in 0..n {
        let (s, c) = (k as f64 * dphi).sin_cos();
        let w = [c * a[0] + s * b[0], c * a[1] + s * b[1], c * a[2] + s * b[2]];
        m = linalg::mat_add(&m, &linalg::outer(&w, &w));
    }
    linalg::mat_scale(&m, dphi / u_mag)
}
