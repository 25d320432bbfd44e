//! Collision frequency σ(v) = ∫B(v, v − v*)μ(v*)dv* at Maxwellian.
//!
//! σ has eigenvector v with eigenvalue λ₁ and the double eigenvalue λ₂ on
//! v^⊥. With I_m(r) = ∫₀ʳ yᵐ e^{−y²/2}J(y) dy,
//!
//!   λ₁(r) = √(π/2)·I₂(r)/r³,   λ₂(r) = √(π/8)·(I₀(r) − I₂(r)/r²)/r.

use std::f64::consts::PI;

use crate::config::PlasmaConfig;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernel::{jay_oracle, jay_scaled};
use crate::linalg::{self, Mat3, Vec3};
use crate::quad::{self, GaussLegendre, Tolerance};

const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;
const SQRT_PI_OVER_8: f64 = 0.626_657_068_657_750_1;

/// Below this |v| the eigenvalues come from the Taylor expansion of J̃.
pub const SMALL_R: f64 = 1e-3;
/// Below this |v| the derivatives use their cancellation-free integral forms.
const DIRECT_DERIV_R: f64 = 1.0;
/// Spacing and extent of the cumulative-integral nodes.
const TABLE_STEP: f64 = 0.25;
const TABLE_END: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvaluePair {
    pub r: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn tight() -> Tolerance {
    Tolerance::new(1e-13, 1e-300)
}

/// Cumulative moments I₀, I₂ at fixed nodes, with λ and dλ sampled there.
/// Off-node values add a local adaptive integral, so no interpolation error
/// enters λ.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    cfg: PlasmaConfig,
    pub radial_grid: Vec<f64>,
    pub i0: Vec<f64>,
    pub i2: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub dlambda1: Vec<f64>,
    pub dlambda2: Vec<f64>,
    /// J̃(y) ≈ a₀ + a₂y² + a₄y⁴ near the origin.
    taylor: [f64; 3],
}

impl FrequencyTable {
    pub fn new(cfg: &PlasmaConfig, exec: Exec) -> Result<Self> {
        cfg.validate()?;
        let n = (TABLE_END / TABLE_STEP).round() as usize + 1;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * TABLE_STEP).collect();
        let segs = exec.map(n - 1, |i| -> Result<(f64, f64)> {
            let (a, b) = (grid[i], grid[i + 1]);
            let s0 = quad::integrate(|y| jay_scaled(cfg, y), &[a, b], tight())?;
            let s2 = quad::integrate(|y| y * y * jay_scaled(cfg, y), &[a, b], tight())?;
            Ok((s0, s2))
        });
        let mut i0 = vec![0.0; n];
        let mut i2 = vec![0.0; n];
        for (k, s) in segs.into_iter().enumerate() {
            let (s0, s2) = s?;
            i0[k + 1] = i0[k] + s0;
            i2[k + 1] = i2[k] + s2;
        }
        let mut t = Self {
            cfg: *cfg,
            radial_grid: grid,
            i0,
            i2,
            lambda1: Vec::new(),
            lambda2: Vec::new(),
            dlambda1: Vec::new(),
            dlambda2: Vec::new(),
            taylor: taylor_coefficients(cfg),
        };
        let pairs = exec.map(n, |i| {
            let r = t.radial_grid[i];
            let p = t.lambda_pair(r)?;
            let d = if r > 0.0 { t.lambda_derivatives(r)? } else { (0.0, 0.0) };
            Ok::<_, Error>((p, d))
        });
        for p in pairs {
            let (p, d) = p?;
            t.lambda1.push(p.lambda1);
            t.lambda2.push(p.lambda2);
            t.dlambda1.push(d.0);
            t.dlambda2.push(d.1);
        }
        Ok(t)
    }

    pub fn config(&self) -> &PlasmaConfig {
        &self.cfg
    }

    /// (I₀(r), I₂(r)).
    pub fn moments(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("|v| must be nonnegative, got {r}")));
        }
        let last = self.radial_grid.len() - 1;
        let k = ((r / TABLE_STEP).floor() as usize).min(last);
        let a = self.radial_grid[k];
        if r == a {
            return Ok((self.i0[k], self.i2[k]));
        }
        let cfg = &self.cfg;
        // Beyond the table the integrand is smooth and ~y^{m−3}; splitting at
        // a geometric sequence keeps the adaptive rule efficient.
        let mut pts = vec![a];
        let mut b = a;
        while 2.0 * b.max(1.0) < r {
            b = 2.0 * b.max(1.0);
            pts.push(b);
        }
        pts.push(r);
        let s0 = quad::integrate(|y| jay_scaled(cfg, y), &pts, tight())?;
        let s2 = quad::integrate(|y| y * y * jay_scaled(cfg, y), &pts, tight())?;
        Ok((self.i0[k] + s0, self.i2[k] + s2))
    }

    pub fn lambda_pair(&self, r: f64) -> Result<EigenvaluePair> {
        let r = r.abs();
        if r < SMALL_R {
            let [a0, a2, a4] = self.taylor;
            let r2 = r * r;
            return Ok(EigenvaluePair {
                r,
                lambda1: SQRT_PI_OVER_2 * (a0 / 3.0 + a2 * r2 / 5.0 + a4 * r2 * r2 / 7.0),
                lambda2: SQRT_PI_OVER_2 * (a0 / 3.0 + a2 * r2 / 15.0 + a4 * r2 * r2 / 35.0),
            });
        }
        let (i0, i2) = self.moments(r)?;
        Ok(EigenvaluePair {
            r,
            lambda1: SQRT_PI_OVER_2 * i2 / (r * r * r),
            lambda2: SQRT_PI_OVER_8 * (i0 - i2 / (r * r)) / r,
        })
    }

    /// (dλ₁/dr, dλ₂/dr).
    pub fn lambda_derivatives(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!(
                "derivatives need r > 0 (they vanish at the origin by symmetry), got {r}"
            )));
        }
        if r < SMALL_R {
            let [_, a2, a4] = self.taylor;
            let r3 = r * r * r;
            return Ok((
                SQRT_PI_OVER_2 * (2.0 * a2 * r / 5.0 + 4.0 * a4 * r3 / 7.0),
                SQRT_PI_OVER_2 * (2.0 * a2 * r / 15.0 + 4.0 * a4 * r3 / 35.0),
            ));
        }
        let cfg = &self.cfg;
        let jr = jay_scaled(cfg, r);
        let r4 = r.powi(4);
        if r < DIRECT_DERIV_R {
            let j0 = self.taylor[0];
            // The differences of J̃ carry ~1e-16 roundoff, so the integrals
            // cannot be resolved below ~1e-16·r³.
            let tol = Tolerance::new(1e-12, 1e-14 * r4 / r);
            let d1 = quad::integrate(|y| 3.0 * y * y * (jr - jay_scaled(cfg, y)), &[0.0, r], tol)?;
            let d2 = quad::integrate(|y| (3.0 * y * y - r * r) * (jay_scaled(cfg, y) - j0), &[0.0, r], tol)?;
            return Ok((SQRT_PI_OVER_2 * d1 / r4, SQRT_PI_OVER_8 * d2 / r4));
        }
        let (i0, i2) = self.moments(r)?;
        Ok((SQRT_PI_OVER_2 * (jr / r - 3.0 * i2 / r4), SQRT_PI_OVER_8 * (3.0 * i2 / r4 - i0 / (r * r))))
    }

    /// σ(v) = v̂v̂ᵀλ₁ + (I − v̂v̂ᵀ)λ₂.
    pub fn sigma_matrix(&self, v: &Vec3) -> Result<Mat3> {
        let r = linalg::norm(v);
        let p = self.lambda_pair(r)?;
        if r == 0.0 {
            return Ok(linalg::mat_scale(&linalg::IDENTITY, p.lambda1));
        }
        let vh = linalg::scale(v, 1.0 / r);
        let par = linalg::outer(&vh, &vh);
        Ok(linalg::mat_add(
            &linalg::mat_scale(&par, p.lambda1),
            &linalg::mat_scale(&linalg::mat_sub(&linalg::IDENTITY, &par), p.lambda2),
        ))
    }

    /// σ^i = σ^{ij}v_j/2 = λ₁v_i/2 and ∂_iσ^i = (3λ₁ + r·λ₁′)/2.
    pub fn sigma_vec_and_div(&self, v: &Vec3) -> Result<(Vec3, f64)> {
        let r = linalg::norm(v);
        let p = self.lambda_pair(r)?;
        let d1 = if r > 0.0 { self.lambda_derivatives(r)?.0 } else { 0.0 };
        Ok((linalg::scale(v, 0.5 * p.lambda1), 0.5 * (3.0 * p.lambda1 + r * d1)))
    }

    /// √(π/8)·∫₀^∞ e^{−y²/2}J(y) dy, the limit of r·λ₂(r).
    pub fn lambda2_asymptotic_constant(&self) -> Result<f64> {
        let last = *self.radial_grid.last().unwrap();
        let (i0, _) = self.moments(last)?;
        // y = last/s maps the algebraic tail onto (0, 1].
        let cfg = &self.cfg;
        let tail = quad::integrate(|s| last / (s * s) * jay_scaled(cfg, last / s), &[0.0, 1.0], tight())?;
        Ok(SQRT_PI_OVER_8 * (i0 + tail))
    }
}

/// a₀ = J(0); a₂, a₄ from Richardson-extrapolated even differences.
fn taylor_coefficients(cfg: &PlasmaConfig) -> [f64; 3] {
    let a0 = jay_scaled(cfg, 0.0);
    let h = 0.02;
    let d = |s: f64| (jay_scaled(cfg, s) - a0) / (s * s);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    // d(s) = a₂ + a₄s² + a₆s⁴ + …
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    let a2 = (16.0 * r2 - r1) / 15.0;
    let a4 = (d2 - d3) / (h * h * (0.25 - 0.0625));
    [a0, a2, a4]
}

/// Angular orders of the k-space oracle (GL in cos θ, trapezoid in φ).
pub const ORACLE_POLAR: usize = 64;
pub const ORACLE_AZIMUTH: usize = 128;

/// σ(v) straight from its k-space form
/// (2π)^{−1/2}∫_{|k|≤k₀} k̂k̂ᵀ/|k|³ · e^{−(k̂·v)²/2}/|ε(|k|, k̂·v)|² dk,
/// with the radial integral done by quadrature for every direction.
pub fn sigma_k_oracle(cfg: &PlasmaConfig, v: &Vec3, exec: Exec) -> Result<Mat3> {
    if !(linalg::norm(v) <= 10.0) {
        return Err(Error::Domain("sigma_k_oracle supports |v| ≤ 10".into()));
    }
    let gl = GaussLegendre::new(ORACLE_POLAR);
    let nodes: Vec<(f64, f64)> = gl.on(-1.0, 1.0).collect();
    let dphi = 2.0 * PI / ORACLE_AZIMUTH as f64;
    let rows = exec.map(nodes.len(), |i| -> Result<Mat3> {
        let (ct, wt) = nodes[i];
        let st = (1.0 - ct * ct).sqrt();
        let mut m = linalg::ZERO;
        for k in 0..ORACLE_AZIMUTH {
            let (sp, cp) = (k as f64 * dphi).sin_cos();
            let kh = [st * cp, st * sp, ct];
            let x = linalg::dot(&kh, v);
            // ∫₀^{k₀} ρ³/|ρ² + Ψ|² dρ = J/4.
            let radial = 0.25 * jay_oracle(cfg, x)? * (-0.5 * x * x).exp();
            m = linalg::mat_add(&m, &linalg::mat_scale(&linalg::outer(&kh, &kh), radial));
        }
        Ok(linalg::mat_scale(&m, wt * dphi))
    });
    let mut total = linalg::ZERO;
    for r in rows {
        total = linalg::mat_add(&total, &r?);
    }
    Ok(linalg::mat_scale(&total, 1.0 / (2.0 * PI).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // mpmath, 60 digits.
    const LAMBDA0: f64 = 0.161_382_727_985_606_01;
    const PAIRS: [(f64, f64, f64); 4] = [
        (0.5, 0.164_260_258_401_662_53, 0.162_334_677_869_873_42),
        (1.0, 0.173_527_030_099_301_48, 0.165_319_030_820_813_73),
        (2.0, 0.212_161_106_147_398_72, 0.178_378_677_529_065_9),
        (8.0, 0.025_218_810_324_078_558, 0.120_345_765_665_407),
    ];
    const LAMBDA2_CONST: f64 = 1.088_793_045_151_801;

    fn table() -> FrequencyTable {
        FrequencyTable::new(&PlasmaConfig::default(), Exec::Parallel).unwrap()
    }

    #[test]
    fn zero_velocity_limit() {
        let t = table();
        let p = t.lambda_pair(0.0).unwrap();
        assert_eq!(p.lambda1, p.lambda2);
        assert_relative_eq!(p.lambda1, LAMBDA0, max_relative = 1e-13);
        let m = t.sigma_matrix(&[0.0; 3]).unwrap();
        assert_eq!(m[0][0], LAMBDA0.max(p.lambda1).min(p.lambda1));
        let (s, div) = t.sigma_vec_and_div(&[0.0; 3]).unwrap();
        assert_eq!(s, [0.0; 3]);
        assert_relative_eq!(div, 1.5 * p.lambda1, max_relative = 1e-15);
    }

    #[test]
    fn reference_eigenvalues() {
        let t = table();
        for (r, l1, l2) in PAIRS {
            let p = t.lambda_pair(r).unwrap();
            assert_relative_eq!(p.lambda1, l1, max_relative = 1e-10);
            assert_relative_eq!(p.lambda2, l2, max_relative = 1e-10);
        }
        let p = t.lambda_pair(100.0).unwrap();
        assert_relative_eq!(p.lambda1, 2.893_419_493_613_630_3e-5, max_relative = 1e-9);
        assert_relative_eq!(100.0 * p.lambda2, 1.087_189_232_202_511_8, max_relative = 1e-10);
        assert_relative_eq!(t.lambda2_asymptotic_constant().unwrap(), LAMBDA2_CONST, max_relative = 1e-10);
    }

    #[test]
    fn small_r_branch_is_continuous() {
        let t = table();
        let r = SMALL_R;
        let taylor = t.lambda_pair(r * (1.0 - 1e-12)).unwrap();
        let exact = t.lambda_pair(r).unwrap();
        assert!((taylor.lambda1 - exact.lambda1).abs() < 1e-9);
        assert!((taylor.lambda2 - exact.lambda2).abs() < 1e-9);
        let dt = t.lambda_derivatives(r * (1.0 - 1e-12)).unwrap();
        let de = t.lambda_derivatives(r).unwrap();
        assert!((dt.0 - de.0).abs() < 1e-9 && (dt.1 - de.1).abs() < 1e-9);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let t = table();
        let h = 1e-5;
        for r in [0.5, 0.99, 1.0, 2.0, 8.0, 37.3] {
            let (d1, d2) = t.lambda_derivatives(r).unwrap();
            let p = t.lambda_pair(r + h).unwrap();
            let m = t.lambda_pair(r - h).unwrap();
            let f1 = (p.lambda1 - m.lambda1) / (2.0 * h);
            let f2 = (p.lambda2 - m.lambda2) / (2.0 * h);
            assert!((d1 - f1).abs() < 1e-6f64.max(1e-4 * d1.abs()), "r={r}: {d1} vs {f1}");
            assert!((d2 - f2).abs() < 1e-6f64.max(1e-4 * d2.abs()), "r={r}: {d2} vs {f2}");
        }
    }

    #[test]
    fn table_invariants() {
        let t = table();
        for k in 1..t.radial_grid.len() {
            assert!(t.i0[k] >= t.i0[k - 1] && t.i2[k] >= t.i2[k - 1]);
            let r = t.radial_grid[k];
            assert!(t.i2[k] <= r * r * t.i0[k]);
            assert!(t.lambda1[k] > 0.0 && t.lambda2[k] > 0.0);
        }
    }

    #[test]
    fn sigma_matrix_structure() {
        let t = table();
        let v = [0.4, -1.3, 2.2];
        let m = t.sigma_matrix(&v).unwrap();
        let p = t.lambda_pair(linalg::norm(&v)).unwrap();
        let mv = linalg::mat_vec(&m, &v);
        for i in 0..3 {
            assert_relative_eq!(mv[i], p.lambda1 * v[i], max_relative = 1e-13);
        }
        let rot = linalg::rotation(&[0.3, 0.9, -0.2], 1.1);
        let rv = linalg::mat_vec(&rot, &v);
        let lhs = t.sigma_matrix(&rv).unwrap();
        let rhs = linalg::mat_mul(&linalg::mat_mul(&rot, &m), &linalg::transpose(&rot));
        let err = linalg::frobenius(&linalg::mat_sub(&lhs, &rhs));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn divergence_matches_finite_differences() {
        let t = table();
        let h = 1e-5;
        for v in [[0.3, 0.2, -0.9], [2.0, -1.0, 0.5]] {
            let (_, div) = t.sigma_vec_and_div(&v).unwrap();
            let mut fd = 0.0;
            for i in 0..3 {
                let mut a = v;
                let mut b = v;
                a[i] += h;
                b[i] -= h;
                let sa = linalg::mat_vec(&t.sigma_matrix(&a).unwrap(), &a)[i] / 2.0;
                let sb = linalg::mat_vec(&t.sigma_matrix(&b).unwrap(), &b)[i] / 2.0;
                fd += (sa - sb) / (2.0 * h);
            }
            assert!((div - fd).abs() < 1e-7, "{div} vs {fd}");
        }
    }

    #[test]
    fn oracle_at_two() {
        let cfg = PlasmaConfig::default();
        let t = table();
        let o = sigma_k_oracle(&cfg, &[2.0, 0.0, 0.0], Exec::Parallel).unwrap();
        let p = t.lambda_pair(2.0).unwrap();
        assert!(o[0][1].abs() < 1e-10 && o[0][2].abs() < 1e-10 && o[1][2].abs() < 1e-10);
        assert_relative_eq!(o[0][0], p.lambda1, max_relative = 1e-3);
        assert_relative_eq!(o[1][1], p.lambda2, max_relative = 1e-3);
        assert_relative_eq!(o[2][2], p.lambda2, max_relative = 1e-3);
    }
}
