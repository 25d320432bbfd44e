//! Fixed-size 3-vector and 3×3 matrix helpers.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
pub const ZERO: Mat3 = [[0.0; 3]; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
    let mut m = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

pub fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] += b[i][j];
        }
    }
    m
}

pub fn mat_sub(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] -= b[i][j];
        }
    }
    m
}

pub fn mat_scale(a: &Mat3, s: f64) -> Mat3 {
    let mut m = *a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    m
}

pub fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&a[0], v), dot(&a[1], v), dot(&a[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut m = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut m = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[j][i];
        }
    }
    m
}

pub fn trace(a: &Mat3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

pub fn frobenius(a: &Mat3) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Quadratic form zᵀ A z.
pub fn quad_form(a: &Mat3, z: &Vec3) -> f64 {
    dot(z, &mat_vec(a, z))
}

/// I − ûûᵀ for a unit vector û.
pub fn perp_projector(u_hat: &Vec3) -> Mat3 {
    mat_sub(&IDENTITY, &outer(u_hat, u_hat))
}

/// Two unit vectors completing `u_hat` to a right-handed orthonormal basis.
pub fn orthonormal_complement(u_hat: &Vec3) -> (Vec3, Vec3) {
    // Cross with the coordinate axis least aligned with û.
    let ax = u_hat.map(f64::abs);
    let e = if ax[0] <= ax[1] && ax[0] <= ax[2] {
        [1.0, 0.0, 0.0]
    } else if ax[1] <= ax[2] {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let a = cross(u_hat, &e);
    let a = scale(&a, 1.0 / norm(&a));
    let b = cross(u_hat, &a);
    (a, b)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues(a: &Mat3) -> [f64; 3] {
    let mut m = *a;
    for _ in 0..50 {
        let off = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut r = IDENTITY;
            r[p][p] = c;
            r[q][q] = c;
            r[p][q] = s;
            r[q][p] = -s;
            m = mat_mul(&transpose(&r), &mat_mul(&m, &r));
        }
    }
    let mut ev = [m[0][0], m[1][1], m[2][2]];
    ev.sort_by(f64::total_cmp);
    ev
}

/// Rotation by `angle` about the axis `k` (Rodrigues).
pub fn rotation(axis: &Vec3, angle: f64) -> Mat3 {
    let k = scale(axis, 1.0 / norm(axis));
    let (s, c) = angle.sin_cos();
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    let kk = mat_mul(&kx, &kx);
    mat_add(&mat_add(&IDENTITY, &mat_scale(&kx, s)), &mat_scale(&kk, 1.0 - c))
}
