//! Property tests over random inputs.

use std::sync::OnceLock;

use approx::assert_relative_eq;
use proptest::prelude::*;

use balescu::frequency::FrequencyTable;
use balescu::kernel::{jay, jay_scaled, weights_w, xi_matrices, Kernel, RelVelFrame, XiSplit, JAY_MAX_X};
use balescu::linalg::{self, Vec3};
use balescu::operator::{weight_w, OperatorConfig, RadialFunction, RadialOperator, WeightParams};
use balescu::{Exec, PlasmaConfig};

fn plasma() -> PlasmaConfig {
    PlasmaConfig::default()
}

fn kernel() -> &'static Kernel {
    static K: OnceLock<Kernel> = OnceLock::new();
    K.get_or_init(|| Kernel::new(&plasma(), 8.0 * 3f64.sqrt(), Exec::Parallel))
}

fn freq() -> &'static FrequencyTable {
    static F: OnceLock<FrequencyTable> = OnceLock::new();
    F.get_or_init(|| FrequencyTable::new(&plasma(), Exec::Parallel).unwrap())
}

fn op() -> &'static RadialOperator {
    static O: OnceLock<RadialOperator> = OnceLock::new();
    O.get_or_init(|| RadialOperator::new(&plasma(), &OperatorConfig::default(), Exec::Parallel).unwrap())
}

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    [-r..r, -r..r, -r..r]
}

/// Σ c_k r^{2k} e^{−r²/(2s)}.
fn radial_profile() -> impl Strategy<Value = (f64, [f64; 4])> {
    (0.4f64..2.0, [-1.0f64..1.0, -1.0..1.0, -1.0..1.0, -1.0..1.0])
}

fn profile_fn(op: &RadialOperator, s: f64, c: [f64; 4]) -> RadialFunction {
    RadialFunction::from_fn(op.grid, |r| {
        let r2 = r * r;
        (c[0] + r2 * (c[1] + r2 * (c[2] + r2 * c[3]))) * (-0.5 * r2 / s).exp()
    })
}

proptest! {
    #[test]
    fn psi_parity(x in -40.0f64..40.0) {
        let cfg = plasma();
        let (a, b) = (cfg.psi(x), cfg.psi(-x));
        prop_assert_eq!(a.re, b.re);
        prop_assert_eq!(a.im, -b.im);
    }

    #[test]
    fn epsilon_never_vanishes(k in 1e-3f64..1.0, x in -40.0f64..40.0) {
        let e = plasma().epsilon(k, x).unwrap();
        prop_assert!(e.abs() > 0.0);
    }

    #[test]
    fn jay_even_and_positive(x in 0.0f64..JAY_MAX_X) {
        let cfg = plasma();
        let a = jay(&cfg, x).unwrap();
        prop_assert_eq!(a, jay(&cfg, -x).unwrap());
        prop_assert!(a > 0.0);
        prop_assert!(jay_scaled(&cfg, x) > 0.0);
    }

    #[test]
    fn weights_positive_and_sum(r in 0.0f64..12.0) {
        let w = weights_w(&plasma(), r).unwrap();
        prop_assert!(w.w1_scaled > 0.0 && w.w2_scaled > 0.0);
        if r < 8.0 {
            let scale = (-0.5 * r * r).exp();
            prop_assert!((w.w1 * scale - w.w1_scaled).abs() <= 1e-12 * w.w1_scaled.max(1e-300) + 1e-300);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kernel_psd_null_symmetric(v in vec3(5.0), vs in vec3(5.0)) {
        let u = linalg::sub(&v, &vs);
        prop_assume!(linalg::norm(&u) > 1e-6);
        let km = kernel().kernel_b(&v, &vs).unwrap();
        let b = km.b_scaled;
        let scale = linalg::frobenius(&b);
        prop_assert!(linalg::frobenius(&linalg::mat_sub(&b, &linalg::transpose(&b))) <= 1e-14 * scale);
        let eig = linalg::sym_eigenvalues(&b);
        prop_assert!(eig.iter().all(|&e| e >= -1e-12 * scale));
        prop_assert!(linalg::quad_form(&b, &u).abs() <= 1e-12 * scale * linalg::dot(&u, &u));
        let swapped = kernel().kernel_b(&vs, &linalg::sub(&vs, &u)).unwrap().b_scaled;
        prop_assert!(linalg::frobenius(&linalg::mat_sub(&swapped, &b)) <= 1e-12 * scale);
    }

    #[test]
    fn xi_are_orthogonal_rank_one_projections(v in vec3(5.0), vs in vec3(5.0)) {
        let frame = RelVelFrame::new(&v, &vs).unwrap();
        if let XiSplit::Split { xi1, xi2 } = xi_matrices(&frame, &v) {
            prop_assert!((linalg::trace(&xi1) - 1.0).abs() < 1e-13);
            prop_assert!((linalg::trace(&xi2) - 1.0).abs() < 1e-13);
            prop_assert!(linalg::frobenius(&linalg::mat_mul(&xi1, &xi2)) < 1e-13);
            prop_assert!(linalg::norm(&linalg::mat_vec(&xi1, &frame.u_hat)) < 1e-13);
            prop_assert!(linalg::norm(&linalg::mat_vec(&xi2, &frame.u_hat)) < 1e-13);
            let sum = linalg::mat_add(&xi1, &xi2);
            prop_assert!(linalg::frobenius(&linalg::mat_sub(&sum, &linalg::perp_projector(&frame.u_hat))) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_symmetric_with_radial_eigenvector(v in vec3(6.0)) {
        let r = linalg::norm(&v);
        prop_assume!(r > 1e-3);
        let s = freq().sigma_matrix(&v).unwrap();
        let p = freq().lambda_pair(r).unwrap();
        prop_assert!(p.lambda1 > 0.0 && p.lambda2 > 0.0);
        let sv = linalg::mat_vec(&s, &v);
        for k in 0..3 {
            prop_assert!((sv[k] - p.lambda1 * v[k]).abs() < 1e-12 * r);
        }
        prop_assert!((linalg::trace(&s) - p.lambda1 - 2.0 * p.lambda2).abs() < 1e-12);
    }

    #[test]
    fn weight_is_at_least_one_for_nonnegative_ell(
        ell in 0.0f64..4.0, theta in 0.0f64..2.0, q in 0.01f64..0.99, v in vec3(10.0)
    ) {
        let p = WeightParams::new(ell, theta, q).unwrap();
        prop_assert!(weight_w(&p, &v).unwrap() >= 1.0);
    }

    #[test]
    fn norm_sigma_scales_quadratically((s, c) in radial_profile(), k in -5.0f64..5.0) {
        let op = op();
        let g = profile_fn(op, s, c);
        let p = WeightParams::default();
        let a = op.norm_sigma(&g, &p, true);
        let b = op.norm_sigma(&g.scaled(k), &p, true);
        prop_assert!(a >= 0.0);
        prop_assert!((b - k * k * a).abs() <= 1e-12 * b.max(a));
    }

    #[test]
    fn projection_idempotent_and_moment_free((s, c) in radial_profile()) {
        let op = op();
        let g = profile_fn(op, s, c);
        let p = op.project_p(&g);
        let pp = op.project_p(&p);
        prop_assert!(p.sub(&pp).norm() <= 1e-12 * g.norm().max(1e-300));
        let (m, e) = op.remove_null(&g).moments();
        prop_assert!(m.abs() < 1e-12 * g.norm() && e.abs() < 1e-11 * g.norm());
    }

    #[test]
    fn coercivity_ratio_scale_invariant((s, c) in radial_profile(), k in 0.1f64..10.0) {
        let op = op();
        let g = op.remove_null(&profile_fn(op, s, c));
        let unit = WeightParams::default();
        let ratio = |g: &RadialFunction| op.apply_l(g).unwrap().inner(g) / op.norm_sigma(g, &unit, false);
        let a = ratio(&g);
        let b = ratio(&g.scaled(k));
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn policies_give_identical_operators() {
    let cfg = OperatorConfig { m: 40, ..OperatorConfig::default() };
    let a = RadialOperator::new(&plasma(), &cfg, Exec::Sequential).unwrap();
    let b = RadialOperator::new(&plasma(), &cfg, Exec::Parallel).unwrap();
    assert_eq!(a.l_matrix(), b.l_matrix());
    let w = Kernel::new(&plasma(), 5.0, Exec::Sequential).table().scaled(3.3);
    assert_relative_eq!(w.0, Kernel::new(&plasma(), 5.0, Exec::Parallel).table().scaled(3.3).0);
}
