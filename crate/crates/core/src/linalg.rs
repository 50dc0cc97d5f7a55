// Small fixed-size matrix helpers used by the Abreu calculus and the
// Newton iteration. Nothing here needs a general linear algebra crate.

pub(crate) type Mat2 = [[f64; 2]; 2];
pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) const ZERO2: Mat2 = [[0.0; 2]; 2];

pub(crate) fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = ZERO2;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn mat2_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub(crate) fn mat2_scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub(crate) fn mat2_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub(crate) fn mat2_inv(a: &Mat2) -> Option<Mat2> {
    let det = mat2_det(a);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub(crate) fn sym2_eigenvalues(a: &Mat2) -> [f64; 2] {
    let m = 0.5 * (a[0][0] + a[1][1]);
    let d = 0.5 * (a[0][0] - a[1][1]);
    let off = 0.5 * (a[0][1] + a[1][0]);
    let r = crate::math::sqrt(d * d + off * off);
    [m - r, m + r]
}

/// `|A|` for symmetric `A`: same eigenvectors, absolute eigenvalues.
pub(crate) fn sym2_abs(a: &Mat2) -> Mat2 {
    let [e1, e2] = sym2_eigenvalues(a);
    if e2 - e1 <= 1e-14 * e1.abs().max(e2.abs()) {
        return [[e1.abs(), 0.0], [0.0, e1.abs()]];
    }
    // spectral projectors (A − e_j I)/(e_i − e_j)
    let p1 = [[(a[0][0] - e2) / (e1 - e2), a[0][1] / (e1 - e2)], [a[1][0] / (e1 - e2), (a[1][1] - e2) / (e1 - e2)]];
    let p2 = [[(a[0][0] - e1) / (e2 - e1), a[0][1] / (e2 - e1)], [a[1][0] / (e2 - e1), (a[1][1] - e1) / (e2 - e1)]];
    mat2_add(&mat2_scale(&p1, e1.abs()), &mat2_scale(&p2, e2.abs()))
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    crate::math::sqrt(dot3(a, a))
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn scale3(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn normalize3(a: &[f64; 3]) -> [f64; 3] {
    scale3(a, 1.0 / norm3(a))
}

/// Orthonormal basis of the plane orthogonal to the unit vector `x`.
pub(crate) fn tangent_basis(x: &[f64; 3]) -> [[f64; 3]; 2] {
    // pick the coordinate axis least aligned with x
    let mut axis = [0.0; 3];
    let mut best = 0;
    for i in 1..3 {
        if crate::math::abs(x[i]) < crate::math::abs(x[best]) {
            best = i;
        }
    }
    axis[best] = 1.0;
    let t1 = normalize3(&cross3(x, &axis));
    let t2 = cross3(x, &t1);
    [t1, t2]
}
