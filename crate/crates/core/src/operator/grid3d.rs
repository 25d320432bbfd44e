//! Perturbations on a uniform n³ grid over [−r_max, r_max]³.
//!
//! The bilinear form is evaluated in the symmetric condensed shape
//!
//!   ⟨Lg₁, g₂⟩ = ∫σ^{ij}(d_jg₁)(d_ig₂) − ∬B_{ij}√(μμ*)(d_jg₁)*(d_ig₂) dv*dv,
//!
//! with d = ∂ + v/2. Writing g = √μ G gives dg = √μ∇G; ∇G is differenced on
//! the grid and trilinearly interpolated off it, which reproduces ∇G exactly
//! for the collision invariants G ∈ {1, v, |v|²}.

use super::{sqrt_maxwellian_r, weight_r, MomentVector, OperatorConfig, USphereRule, WeightParams};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frequency::FrequencyTable;
use crate::kernel::Kernel;
use crate::linalg::{self, Vec3};

/// Largest grid the nested 6-D quadrature is allowed to run on.
pub const MAX_GRID_3D: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction3D {
    pub n: usize,
    pub r_max: f64,
    pub values: Vec<f64>,
}

impl GridFunction3D {
    pub fn from_fn(n: usize, r_max: f64, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Domain(format!("grid size must be odd and ≥ 3, got {n}")));
        }
        let mut g = Self { n, r_max, values: Vec::with_capacity(n * n * n) };
        for idx in 0..n * n * n {
            let v = g.node(idx);
            g.values.push(f(&v));
        }
        if g.values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite grid values".into()));
        }
        Ok(g)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.r_max / (self.n - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n + i[1]) * self.n + i[2]
    }

    pub fn node(&self, idx: usize) -> Vec3 {
        let h = self.h();
        let i = self.split(idx);
        [-self.r_max + i[0] as f64 * h, -self.r_max + i[1] as f64 * h, -self.r_max + i[2] as f64 * h]
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.r_max != other.r_max {
            return Err(Error::Input("grid functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> f64 {
        let h3 = self.h().powi(3);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * h3
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn moments(&self) -> MomentVector {
        let h3 = self.h().powi(3);
        let mut out = MomentVector { mass: 0.0, momentum: [0.0; 3], energy: 0.0 };
        for (idx, g) in self.values.iter().enumerate() {
            let v = self.node(idx);
            let r2 = linalg::dot(&v, &v);
            let t = h3 * g * sqrt_maxwellian_r(r2.sqrt());
            out.mass += t;
            for k in 0..3 {
                out.momentum[k] += t * v[k];
            }
            out.energy += t * r2;
        }
        out
    }

    /// Second-order difference along `axis`: central inside, one-sided at
    /// the faces of the box.
    fn diff(values: &[f64], n: usize, h: f64, i: [usize; 3], axis: usize) -> f64 {
        let at = |k: usize| {
            let mut j = i;
            j[axis] = k;
            values[(j[0] * n + j[1]) * n + j[2]]
        };
        let k = i[axis];
        if k == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if k + 1 == n {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        }
    }

    pub fn gradient(&self) -> Vec<Vec3> {
        let h = self.h();
        (0..self.len())
            .map(|idx| {
                let i = self.split(idx);
                [0, 1, 2].map(|a| Self::diff(&self.values, self.n, h, i, a))
            })
            .collect()
    }

    /// ∇(g/√μ) at the nodes.
    fn grad_g_over_sqrt_mu(&self) -> Vec<Vec3> {
        let big_g: Vec<f64> =
            (0..self.len()).map(|idx| self.values[idx] / sqrt_maxwellian_r(linalg::norm(&self.node(idx)))).collect();
        let h = self.h();
        (0..self.len())
            .map(|idx| {
                let i = self.split(idx);
                [0, 1, 2].map(|a| Self::diff(&big_g, self.n, h, i, a))
            })
            .collect()
    }

    /// Trilinear interpolation of a nodal vector field; zero outside the box.
    fn interpolate(&self, field: &[Vec3], v: &Vec3) -> Vec3 {
        let h = self.h();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let t = (v[a] + self.r_max) / h;
            if !(t >= 0.0 && t <= (self.n - 1) as f64) {
                return [0.0; 3];
            }
            let b = (t.floor() as usize).min(self.n - 2);
            base[a] = b;
            frac[a] = t - b as f64;
        }
        let mut out = [0.0; 3];
        for corner in 0..8usize {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..3 {
                let bit = (corner >> a) & 1;
                idx[a] = base[a] + bit;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                let f = &field[self.index(idx)];
                for k in 0..3 {
                    out[k] += w * f[k];
                }
            }
        }
        out
    }

    /// Orthogonal projection onto span{√μ, v√μ, |v|²√μ} in the discrete
    /// inner product, by modified Gram–Schmidt.
    pub fn project_p(&self) -> Self {
        let basis = null_basis(self.n, self.r_max);
        let mut out = vec![0.0; self.len()];
        let h3 = self.h().powi(3);
        for q in &basis {
            let c: f64 = q.iter().zip(&self.values).map(|(a, b)| a * b).sum::<f64>() * h3;
            for (o, qi) in out.iter_mut().zip(q) {
                *o += c * qi;
            }
        }
        Self { n: self.n, r_max: self.r_max, values: out }
    }

    /// |g|²_σ = ∫w²σ^{ij}(∂_ig∂_jg + (v_i/2)(v_j/2)g²) dv by differences and
    /// nodal quadrature.
    pub fn norm_sigma(&self, freq: &FrequencyTable, params: &WeightParams, use_weight: bool) -> Result<f64> {
        let grad = self.gradient();
        let h3 = self.h().powi(3);
        let mut s = 0.0;
        for (idx, d) in grad.iter().enumerate() {
            let v = self.node(idx);
            let sig = freq.sigma_matrix(&v)?;
            let g = self.values[idx];
            let half_v = linalg::scale(&v, 0.5 * g);
            let w2 = if use_weight { weight_r(params, linalg::norm(&v)).powi(2) } else { 1.0 };
            s += h3 * w2 * (linalg::quad_form(&sig, d) + linalg::quad_form(&sig, &half_v));
        }
        Ok(s)
    }
}

fn null_basis(n: usize, r_max: f64) -> Vec<Vec<f64>> {
    let make = |f: &dyn Fn(&Vec3) -> f64| {
        GridFunction3D::from_fn(n, r_max, |v| f(v) * sqrt_maxwellian_r(linalg::norm(v))).expect("null modes are finite")
    };
    let raw = [make(&|_| 1.0), make(&|v| v[0]), make(&|v| v[1]), make(&|v| v[2]), make(&|v| linalg::dot(v, v))];
    let mut basis: Vec<GridFunction3D> = Vec::new();
    for mut f in raw {
        for _ in 0..2 {
            for q in &basis {
                let c = f.inner(q);
                for (a, b) in f.values.iter_mut().zip(&q.values) {
                    *a -= c * b;
                }
            }
        }
        let nrm = f.norm();
        for a in f.values.iter_mut() {
            *a /= nrm;
        }
        basis.push(f);
    }
    basis.into_iter().map(|f| f.values).collect()
}

/// The u-rule rotated so its polar axis lies along v.
fn aligned(rule: &USphereRule, v: &Vec3) -> Vec<(Vec3, f64)> {
    let r = linalg::norm(v);
    if r == 0.0 {
        return rule.nodes.clone();
    }
    let z = linalg::scale(v, 1.0 / r);
    let (x, y) = linalg::orthonormal_complement(&z);
    rule.nodes
        .iter()
        .map(|(u, w)| {
            (
                [
                    u[0] * x[0] + u[1] * y[0] + u[2] * z[0],
                    u[0] * x[1] + u[1] * y[1] + u[2] * z[1],
                    u[0] * x[2] + u[1] * y[2] + u[2] * z[2],
                ],
                *w,
            )
        })
        .collect()
}

fn check_budget(n: usize) -> Result<()> {
    if n > MAX_GRID_3D {
        return Err(Error::Budget { n, max: MAX_GRID_3D });
    }
    Ok(())
}

/// ⟨Lg₁, g₂⟩ on the grid.
///
/// The double integral is taken in centre/relative coordinates
/// v = c + u/2, v* = c − u/2 with c on the grid nodes and u on the spherical
/// rule of `cfg`. The u-rule is symmetric under u → −u, which is exactly the
/// exchange v ↔ v*, so the discrete form is symmetric in (g₁, g₂) up to
/// rounding.
pub fn quadratic_form_l_3d(
    g1: &GridFunction3D,
    g2: &GridFunction3D,
    freq: &FrequencyTable,
    kernel: &Kernel,
    cfg: &OperatorConfig,
    exec: Exec,
) -> Result<f64> {
    g1.same_grid(g2)?;
    check_budget(g1.n)?;
    let rule = USphereRule::new(cfg);
    let grad1 = g1.grad_g_over_sqrt_mu();
    let grad2 = g2.grad_g_over_sqrt_mu();
    let h3 = g1.h().powi(3);
    let field = |grad: &[Vec3], v: &Vec3| linalg::scale(&g1.interpolate(grad, v), sqrt_maxwellian_r(linalg::norm(v)));
    let terms = exec.map(g1.len(), |idx| -> Result<f64> {
        let c = g1.node(idx);
        let sm = sqrt_maxwellian_r(linalg::norm(&c));
        let d1 = linalg::scale(&grad1[idx], sm);
        let d2 = linalg::scale(&grad2[idx], sm);
        let sig = freq.sigma_matrix(&c)?;
        let local = linalg::dot(&d2, &linalg::mat_vec(&sig, &d1));
        let mut nonlocal = 0.0;
        for (u, w) in aligned(&rule, &c) {
            let half = linalg::scale(&u, 0.5);
            let v = [c[0] + half[0], c[1] + half[1], c[2] + half[2]];
            let vs = linalg::sub(&c, &half);
            let f2 = field(&grad2, &v);
            if f2 == [0.0; 3] {
                continue;
            }
            let f1 = field(&grad1, &vs);
            if f1 == [0.0; 3] {
                continue;
            }
            let b = kernel.fused(&v, &u, linalg::norm(&u));
            nonlocal += w * linalg::dot(&f2, &linalg::mat_vec(&b, &f1));
        }
        Ok(h3 * (local - nonlocal))
    });
    terms.into_iter().sum()
}

/// Kg for an analytic g at the nodes of an n³ grid, straight from
/// Kg = −μ^{−1/2}∂_i(μh_i): with μh = √μ h̃ this is −(∇·h̃ − v·h̃/2), and
/// the divergence is taken by central differences of step `delta`.
/// `g_and_grad` returns g and ∇g.
pub fn radial_k_oracle_3d(
    g_and_grad: &(dyn Fn(&Vec3) -> (f64, Vec3) + Sync),
    n: usize,
    kernel: &Kernel,
    cfg: &OperatorConfig,
    delta: f64,
    exec: Exec,
) -> Result<GridFunction3D> {
    check_budget(n)?;
    let rule = USphereRule::new(cfg);
    let shape = GridFunction3D::from_fn(n, cfg.r_max, |_| 0.0)?;
    let h_tilde = |v: &Vec3| -> Vec3 {
        let mut acc = [0.0; 3];
        for (u, w) in aligned(&rule, v) {
            let vs = linalg::sub(v, &u);
            let (g, dg) = g_and_grad(&vs);
            let d = [dg[0] + 0.5 * vs[0] * g, dg[1] + 0.5 * vs[1] * g, dg[2] + 0.5 * vs[2] * g];
            let b = kernel.fused(v, &u, linalg::norm(&u));
            let bd = linalg::mat_vec(&b, &d);
            for k in 0..3 {
                acc[k] += w * bd[k];
            }
        }
        acc
    };
    let values = exec.map(shape.len(), |idx| {
        let v = shape.node(idx);
        let mut div = 0.0;
        for a in 0..3 {
            let mut p = v;
            let mut m = v;
            p[a] += delta;
            m[a] -= delta;
            div += (h_tilde(&p)[a] - h_tilde(&m)[a]) / (2.0 * delta);
        }
        let h0 = h_tilde(&v);
        -(div - 0.5 * linalg::dot(&v, &h0))
    });
    Ok(GridFunction3D { n, r_max: cfg.r_max, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PlasmaConfig;

    #[test]
    fn projection_and_moments() {
        let g = GridFunction3D::from_fn(9, 8.0, |v| v[0] * (-0.4 * linalg::dot(v, v)).exp()).unwrap();
        let m = g.moments();
        assert!(m.mass.abs() < 1e-14 && m.energy.abs() < 1e-13);
        let p = g.project_p();
        let pp = p.project_p();
        let diff: f64 = p.values.iter().zip(&pp.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
        let mu = GridFunction3D::from_fn(9, 8.0, |v| sqrt_maxwellian_r(linalg::norm(v))).unwrap();
        let pm = mu.project_p();
        let e: f64 = pm.values.iter().zip(&mu.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(e < 1e-12);
    }

    #[test]
    fn budget_guard() {
        let cfg = OperatorConfig::default();
        let plasma = PlasmaConfig::default();
        let kernel = Kernel::new(&plasma, 1.0, Exec::Parallel);
        let freq = FrequencyTable::new(&plasma, Exec::Parallel).unwrap();
        let g = GridFunction3D::from_fn(19, 8.0, |_| 1.0).unwrap();
        assert!(matches!(
            quadratic_form_l_3d(&g, &g, &freq, &kernel, &cfg, Exec::Parallel),
            Err(Error::Budget { n: 19, .. })
        ));
    }

    #[test]
    fn quadratic_form_null_modes_and_symmetry() {
        let plasma = PlasmaConfig::default();
        let cfg = OperatorConfig { n: 11, ..OperatorConfig::default() };
        let kernel = Kernel::new(&plasma, cfg.kernel_reach(), Exec::Parallel);
        let freq = FrequencyTable::new(&plasma, Exec::Parallel).unwrap();
        let sm = |v: &Vec3| sqrt_maxwellian_r(linalg::norm(v));
        let q = |a: &GridFunction3D, b: &GridFunction3D| {
            quadratic_form_l_3d(a, b, &freq, &kernel, &cfg, Exec::Parallel).unwrap()
        };
        let mu = GridFunction3D::from_fn(cfg.n, 8.0, |v| sm(v)).unwrap();
        assert_eq!(q(&mu, &mu), 0.0);
        let mom = GridFunction3D::from_fn(cfg.n, 8.0, |v| v[0] * sm(v)).unwrap();
        // Coarse grid: 8e-3 here, 1e-4 at the default n = 15.
        let r = q(&mom, &mom) / mom.norm().powi(2);
        assert!(r.abs() < 2e-2, "{r}");
        let g1 = GridFunction3D::from_fn(cfg.n, 8.0, |v| (-(linalg::norm(v) - 1.0).powi(2)).exp()).unwrap();
        let g2 = GridFunction3D::from_fn(cfg.n, 8.0, |v| (1.0 + v[0] - v[1] * v[2]) * (-0.5 * linalg::dot(v, v)).exp())
            .unwrap();
        let (a, b) = (q(&g1, &g2), q(&g2, &g1));
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        assert!(q(&g1, &g1) > 0.0);
    }

    #[test]
    fn trilinear_is_exact_on_linear_fields() {
        let g = GridFunction3D::from_fn(7, 3.0, |_| 0.0).unwrap();
        let field: Vec<Vec3> = (0..g.len()).map(|i| linalg::scale(&g.node(i), 2.0)).collect();
        let v = [0.37, -1.2, 2.9];
        let out = g.interpolate(&field, &v);
        for k in 0..3 {
            assert!((out[k] - 2.0 * v[k]).abs() < 1e-13);
        }
        assert_eq!(g.interpolate(&field, &[3.5, 0.0, 0.0]), [0.0; 3]);
    }
}
