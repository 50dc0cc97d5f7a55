//! Calculus of the canonical symplectic potential `u = ½ Σ ℓ_k log ℓ_k`.
//!
//! Here `ℓ_k(μ) = ⟨ν_k, μ⟩ − λ_k` are the lattice-normalized edge functions.
//! Everything is closed form:
//!
//! ```text
//! G      = ½ Σ ν νᵀ / ℓ                  (Hessian of u)
//! H      = G⁻¹
//! ∂_a G  = −½ Σ ν_a ν νᵀ / ℓ²
//! ∂_a∂_b G = Σ ν_a ν_b ν νᵀ / ℓ³
//! ∂_a H  = −H (∂_a G) H
//! ∂_b∂_a H = −(∂_b H)(∂_a G)H − H(∂_a∂_b G)H − H(∂_a G)(∂_b H)
//! s_J    = −Σ H_{ij,ij}
//! ```

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::linalg::{mat2_add, mat2_inv, mat2_mul, mat2_scale, Mat2, ZERO2};
use crate::math;
use crate::polytope::{AffineFn2, Polygon, Polytope2};
use crate::quadrature::{integrate_boundary, integrate_field, Poly2, Weight};

/// Derivatives of the canonical potential at one interior point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSample {
    pub point: Point2,
    /// `u_{,ij}`
    pub g: Mat2,
    /// `G⁻¹`
    pub h: Mat2,
    /// `dh[a][i][j] = ∂_a H_ij`
    pub dh: [Mat2; 2],
    /// `d2h[a][b][i][j] = ∂_a ∂_b H_ij`
    pub d2h: [[Mat2; 2]; 2],
    /// Abreu scalar curvature `−Σ H_{ij,ij}`.
    pub s_j: f64,
}

impl CurvatureSample {
    /// `Σ_ij H_{ij,ij}`.
    pub fn hess_div2(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += self.d2h[i][j][i][j];
            }
        }
        acc
    }

    /// `Σ_ij w_i H_{ij,j}`.
    pub fn div_against(&self, w: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += w[i] * self.dh[j][i][j];
            }
        }
        acc
    }

    /// `Σ_ij v_i w_j H_ij`.
    pub fn h_form(&self, v: [f64; 2], w: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += v[i] * w[j] * self.h[i][j];
            }
        }
        acc
    }
}

fn outer(v: [f64; 2]) -> Mat2 {
    [[v[0] * v[0], v[0] * v[1]], [v[1] * v[0], v[1] * v[1]]]
}

fn neg(m: &Mat2) -> Mat2 {
    mat2_scale(m, -1.0)
}

/// Closed-form derivatives of the canonical potential of `delta` at `mu`.
pub fn canonical_sample(delta: &Polytope2, mu: Point2) -> Result<CurvatureSample> {
    if !mu.is_finite() {
        return Err(Error::Domain("sample point is not finite".into()));
    }
    let mut g = ZERO2;
    let mut ga = [ZERO2; 2];
    let mut gab = [[ZERO2; 2]; 2];
    for e in delta.edges() {
        let l = e.defining_function().eval(mu);
        if !(l > 0.0) {
            return Err(Error::Domain(alloc::format!("point ({}, {}) is not interior", mu.x, mu.y)));
        }
        let nu = [e.normal[0] as f64, e.normal[1] as f64];
        let nn = outer(nu);
        g = mat2_add(&g, &mat2_scale(&nn, 0.5 / l));
        let l2 = l * l;
        let l3 = l2 * l;
        for a in 0..2 {
            ga[a] = mat2_add(&ga[a], &mat2_scale(&nn, -0.5 * nu[a] / l2));
            for b in 0..2 {
                gab[a][b] = mat2_add(&gab[a][b], &mat2_scale(&nn, nu[a] * nu[b] / l3));
            }
        }
    }
    let h = mat2_inv(&g).ok_or_else(|| Error::Domain("potential Hessian is singular".into()))?;
    let dh = [0, 1].map(|a| neg(&mat2_mul(&mat2_mul(&h, &ga[a]), &h)));
    let mut d2h = [[ZERO2; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let t1 = mat2_mul(&mat2_mul(&dh[b], &ga[a]), &h);
            let t2 = mat2_mul(&mat2_mul(&h, &gab[a][b]), &h);
            let t3 = mat2_mul(&mat2_mul(&h, &ga[a]), &dh[b]);
            d2h[a][b] = neg(&mat2_add(&mat2_add(&t1, &t2), &t3));
        }
    }
    let mut s = CurvatureSample { point: mu, g, h, dh, d2h, s_j: 0.0 };
    s.s_j = -s.hess_div2();
    Ok(s)
}

fn check_kn(k: f64, n: f64) -> Result<()> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain("k must be finite and nonzero".into()));
    }
    if !n.is_finite() || n == 0.0 || n == 1.0 || n == 2.0 {
        return Err(Error::Domain(alloc::format!("n must be finite and not 0, 1 or 2, got {n}")));
    }
    Ok(())
}

fn f_value(f: &AffineFn2, mu: Point2) -> Result<f64> {
    let v = f.eval(mu);
    if !(v > 0.0) {
        return Err(Error::NotPositive);
    }
    Ok(v)
}

fn grad(f: &AffineFn2) -> [f64; 2] {
    [f.a, f.b]
}

/// `s_{J,f,k,n}` from a precomputed sample, in expanded form.
pub fn weighted_scalar_curvature_at(sample: &CurvatureSample, f: &AffineFn2, k: f64, n: f64) -> Result<f64> {
    check_kn(k, n)?;
    let fv = f_value(f, sample.point)?;
    let df = grad(f);
    let kn = k * (n - 1.0);
    let inner = sample.hess_div2()
        + kn / fv * sample.div_against(df)
        + kn / (fv * fv) * (k * (n - 2.0) / 4.0 - 1.0) * sample.h_form(df, df);
    Ok(-math::pow(fv, -k) * inner)
}

/// Weighted `(g_J, f, k, n)`-scalar curvature of the canonical metric at `mu`.
pub fn weighted_scalar_curvature(delta: &Polytope2, mu: Point2, f: &AffineFn2, k: f64, n: f64) -> Result<f64> {
    weighted_scalar_curvature_at(&canonical_sample(delta, mu)?, f, k, n)
}

/// `Σ (f^α H_ij)_{,ij}` by the product rule, term by term.
pub fn divergence_product_rule(sample: &CurvatureSample, f: &AffineFn2, alpha: f64) -> Result<f64> {
    let fv = f_value(f, sample.point)?;
    let df = grad(f);
    let fa = math::pow(fv, alpha);
    let fa1 = alpha * math::pow(fv, alpha - 1.0);
    let fa2 = alpha * (alpha - 1.0) * math::pow(fv, alpha - 2.0);
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            // ∂_i∂_j of f^α H_ij; f is affine so f_{,ij} = 0
            acc += fa * sample.d2h[i][j][i][j]
                + fa1 * df[i] * sample.dh[j][i][j]
                + fa1 * df[j] * sample.dh[i][i][j]
                + fa2 * df[i] * df[j] * sample.h[i][j];
        }
    }
    Ok(acc)
}

/// `f^α Σ {H_{ij,ij} + (2α/f) f_{,i} H_{ij,j} + (α(α−1)/f²) f_{,i} f_{,j} H_ij}`.
pub fn divergence_grouped(sample: &CurvatureSample, f: &AffineFn2, alpha: f64) -> Result<f64> {
    let fv = f_value(f, sample.point)?;
    let df = grad(f);
    let inner = sample.hess_div2()
        + 2.0 * alpha / fv * sample.div_against(df)
        + alpha * (alpha - 1.0) / (fv * fv) * sample.h_form(df, df);
    Ok(math::pow(fv, alpha) * inner)
}

/// Relative residual of `s_{J,f,k,n} f^{k+α} = −Σ (f^α H_ij)_{,ij}` with
/// `α = k(n−1)/2`.
///
/// Zero for `k = −2` (where `α = 1 − n`); otherwise it measures the
/// `f_{,i} f_{,j} H_ij` term the divergence form cannot absorb.
pub fn reduction_residual(sample: &CurvatureSample, f: &AffineFn2, k: f64, n: f64) -> Result<f64> {
    let alpha = k * (n - 1.0) / 2.0;
    let s = weighted_scalar_curvature_at(sample, f, k, n)?;
    let fv = f_value(f, sample.point)?;
    let lhs = s * math::pow(fv, k + alpha);
    let rhs = -divergence_product_rule(sample, f, alpha)?;
    let scale = math::abs(lhs).max(math::abs(rhs)).max(f64::MIN_POSITIVE);
    Ok(math::abs(lhs - rhs) / scale)
}

/// `Δ_J φ = −Σ {φ_{,ij} H_ij + φ_{,i} H_{ij,j}}` from the gradient and Hessian
/// of `φ` at the sample point.
pub fn laplacian(sample: &CurvatureSample, grad_phi: [f64; 2], hess_phi: Mat2) -> f64 {
    let mut acc = sample.div_against(grad_phi);
    for i in 0..2 {
        for j in 0..2 {
            acc += hess_phi[i][j] * sample.h[i][j];
        }
    }
    -acc
}

/// `s_{J,f,k,n}` through the conformal change formula
/// `f^{−k} s_J + 4(n−1)/(n−2) f^{−k(n+2)/4} Δ_J f^{k(n−2)/4}`.
pub fn weighted_scalar_curvature_conformal(sample: &CurvatureSample, f: &AffineFn2, k: f64, n: f64) -> Result<f64> {
    check_kn(k, n)?;
    let fv = f_value(f, sample.point)?;
    let df = grad(f);
    let beta = k * (n - 2.0) / 4.0;
    let c1 = beta * math::pow(fv, beta - 1.0);
    let c2 = beta * (beta - 1.0) * math::pow(fv, beta - 2.0);
    let g = [c1 * df[0], c1 * df[1]];
    let h = [[c2 * df[0] * df[0], c2 * df[0] * df[1]], [c2 * df[1] * df[0], c2 * df[1] * df[1]]];
    let lap = laplacian(sample, g, h);
    Ok(math::pow(fv, -k) * sample.s_j + 4.0 * (n - 1.0) / (n - 2.0) * math::pow(fv, -k * (n + 2.0) / 4.0) * lap)
}

/// Both sides of `∫ φ Σ(f^{1−n}H_ij)_{,ij} = ∫ f^{1−n} Σ H_ij φ_{,ij} − 2∫_∂ f^{1−n} φ dσ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationByParts {
    pub lhs: f64,
    pub rhs_interior: f64,
    pub rhs_boundary: f64,
}

impl IntegrationByParts {
    pub fn residual(&self) -> f64 {
        self.lhs - (self.rhs_interior - self.rhs_boundary)
    }

    /// Magnitude the residual is compared against.
    pub fn scale(&self) -> f64 {
        math::abs(self.lhs).max(math::abs(self.rhs_interior)).max(math::abs(self.rhs_boundary))
    }
}

/// Evaluates both sides of the integration-by-parts identity for the
/// canonical potential, interior terms extrapolated to zero `margin`.
pub fn integration_by_parts(
    delta: &Polytope2,
    f: &AffineFn2,
    n: f64,
    phi: &Poly2,
    tol: f64,
    margin: f64,
) -> Result<IntegrationByParts> {
    if !crate::polytope::is_positive_on(f, delta) {
        return Err(Error::NotPositive);
    }
    let alpha = 1.0 - n;
    let hess_phi = phi.hessian();
    let lhs = integrate_field(
        delta,
        |p| match canonical_sample(delta, p).and_then(|s| divergence_product_rule(&s, f, alpha)) {
            Ok(v) => phi.eval(p) * v,
            Err(_) => f64::NAN,
        },
        tol,
        margin,
    )?;
    let rhs_interior = integrate_field(
        delta,
        |p| match canonical_sample(delta, p) {
            Ok(s) => {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        acc += s.h[i][j] * hess_phi[i][j];
                    }
                }
                math::pow(f.eval(p), alpha) * acc
            }
            Err(_) => f64::NAN,
        },
        tol,
        margin,
    )?;
    let rhs_boundary = 2.0 * integrate_boundary(delta, &Weight::Polynomial(*phi), f, alpha, tol)?.value;
    Ok(IntegrationByParts { lhs: lhs.extrapolated, rhs_interior: rhs_interior.extrapolated, rhs_boundary })
}

/// `LHS − RHS` of the integration-by-parts identity.
pub fn integration_by_parts_residual(
    delta: &Polytope2,
    f: &AffineFn2,
    n: f64,
    phi: &Poly2,
    tol: f64,
    margin: f64,
) -> Result<f64> {
    Ok(integration_by_parts(delta, f, n, phi, tol, margin)?.residual())
}

/// `∫ s_J` over `delta` shrunk by `margin`, extrapolated to zero margin.
pub fn total_abreu_curvature(delta: &Polytope2, tol: f64, margin: f64) -> Result<f64> {
    let poly: &Polygon = delta.as_ref();
    let r = integrate_field(poly, |p| canonical_sample(delta, p).map(|s| s.s_j).unwrap_or(f64::NAN), tol, margin)?;
    Ok(r.extrapolated)
}
