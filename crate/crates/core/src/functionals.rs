//! The `k = −2` toric functionals as polytope integrals.
//!
//! With `f` a positive affine Killing potential on `Δ` and `n ∉ {0, 1, 2}`:
//!
//! ```text
//! vol  = ∫_Δ f^{−n} dμ
//! S    = 2 ∫_∂Δ f^{2−n} dσ
//! c    = 2 ∫_∂Δ f^{1−n} dσ / ∫_Δ f^{−1−n} dμ
//! d    = S / vol
//! Fut(φ) = 2 ∫_∂Δ f^{1−n} φ dσ − c ∫_Δ f^{−1−n} φ dμ
//! EH   = S / vol^{(n−2)/n}
//! ```
//!
//! `dσ` is the lattice boundary measure and angle factors `(2π)^m` are dropped.
//! The Donaldson-Futaki invariant `DF` is `Fut` extended to convex
//! piecewise-linear `φ`.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::math;
use crate::polytope::{is_positive_on, AffineFn2, Polytope2, SplFn};
use crate::quadrature::{integrate_boundary, integrate_interior, integrate_lattice_boundary, integrate_polygon, Weight};

/// The fixed weight exponent `k`.
pub const K: f64 = -2.0;

/// A validated triple `(Δ, f, n)` with a quadrature tolerance.
#[derive(Clone, Copy, Debug)]
pub struct FunctionalContext<'a> {
    delta: &'a Polytope2,
    f: AffineFn2,
    n: f64,
    tol: f64,
}

/// A convex piecewise-linear test function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlConvex {
    Affine(AffineFn2),
    Spl(SplFn),
}

/// The eight integrals every functional here is assembled from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    /// `∫_∂Δ f^{2−n} dσ`
    pub bnd_2: f64,
    /// `∫_∂Δ f^{1−n} · (1, μ1, μ2) dσ`
    pub bnd_1: [f64; 3],
    /// `∫_Δ f^{−n} dμ`
    pub int_0: f64,
    /// `∫_Δ f^{−1−n} · (1, μ1, μ2) dμ`
    pub int_1: [f64; 3],
}

impl Moments {
    pub fn vol(&self) -> f64 {
        self.int_0
    }

    pub fn total_scalar(&self) -> f64 {
        2.0 * self.bnd_2
    }

    pub fn c_const(&self) -> f64 {
        2.0 * self.bnd_1[0] / self.int_1[0]
    }

    pub fn d_const(&self) -> f64 {
        self.total_scalar() / self.int_0
    }

    /// `(Fut(1), Fut(μ1), Fut(μ2))`.
    pub fn futaki_basis(&self) -> [f64; 3] {
        let c = self.c_const();
        [0, 1, 2].map(|i| 2.0 * self.bnd_1[i] - c * self.int_1[i])
    }

    pub fn futaki(&self, phi: &AffineFn2) -> f64 {
        let [f0, f1, f2] = self.futaki_basis();
        phi.c * f0 + phi.a * f1 + phi.b * f2
    }

    pub fn eh(&self, n: f64) -> f64 {
        self.total_scalar() / math::pow(self.int_0, (n - 2.0) / n)
    }

    /// Gradient of `EH` with respect to the coefficients `(a, b, c)` of `f`.
    pub fn eh_gradient(&self, n: f64) -> [f64; 3] {
        let d = self.d_const();
        let pre = (2.0 - n) * math::pow(self.int_0, -(n - 2.0) / n);
        [1, 2, 0].map(|i| pre * (2.0 * self.bnd_1[i] - d * self.int_1[i]))
    }
}

fn check_n(n: f64) -> Result<()> {
    if !n.is_finite() || n == 0.0 || n == 1.0 || n == 2.0 {
        return Err(Error::Domain(alloc::format!("n must be finite and not 0, 1 or 2, got {n}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Domain(alloc::format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

impl<'a> FunctionalContext<'a> {
    pub fn new(delta: &'a Polytope2, f: AffineFn2, n: f64, tol: f64) -> Result<Self> {
        check_n(n)?;
        check_tol(tol)?;
        if !is_positive_on(&f, delta) {
            return Err(Error::NotPositive);
        }
        Ok(Self { delta, f, n, tol })
    }

    pub fn delta(&self) -> &'a Polytope2 {
        self.delta
    }

    pub fn f(&self) -> AffineFn2 {
        self.f
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Same polytope and `n`, different potential.
    pub fn with_f(&self, f: AffineFn2) -> Result<Self> {
        Self::new(self.delta, f, self.n, self.tol)
    }

    /// All eight basic integrals in one adaptive pass per domain.
    pub fn moments(&self) -> Result<Moments> {
        let (f, n) = (self.f, self.n);
        let bnd = integrate_lattice_boundary(
            self.delta,
            None,
            |p: Point2| {
                let v = f.eval(p);
                let w = math::pow(v, 1.0 - n);
                [w * v, w, w * p.x, w * p.y]
            },
            self.tol,
        )?;
        let int = integrate_polygon(
            self.delta.polygon(),
            |p: Point2| {
                let v = f.eval(p);
                let w = math::pow(v, -n);
                let w1 = w / v;
                [w, w1, w1 * p.x, w1 * p.y]
            },
            self.tol,
        )?;
        let b = bnd.values;
        let i = int.values;
        Ok(Moments { bnd_2: b[0], bnd_1: [b[1], b[2], b[3]], int_0: i[0], int_1: [i[1], i[2], i[3]] })
    }

    /// `∫_Δ f^{−n} dμ`.
    pub fn vol(&self) -> Result<f64> {
        Ok(integrate_interior(self.delta, &Weight::one(), &self.f, -self.n, self.tol)?.value)
    }

    /// `2 ∫_∂Δ f^{2−n} dσ`.
    pub fn total_scalar(&self) -> Result<f64> {
        Ok(2.0 * integrate_boundary(self.delta, &Weight::one(), &self.f, 2.0 - self.n, self.tol)?.value)
    }

    pub fn c_const(&self) -> Result<f64> {
        let num = integrate_boundary(self.delta, &Weight::one(), &self.f, 1.0 - self.n, self.tol)?.value;
        let den = integrate_interior(self.delta, &Weight::one(), &self.f, -1.0 - self.n, self.tol)?.value;
        Ok(2.0 * num / den)
    }

    pub fn d_const(&self) -> Result<f64> {
        Ok(self.total_scalar()? / self.vol()?)
    }

    pub fn futaki(&self, phi: &AffineFn2) -> Result<f64> {
        Ok(self.moments()?.futaki(phi))
    }

    /// Normalized Einstein-Hilbert functional with the constant fixed to 2.
    pub fn eh(&self) -> Result<f64> {
        Ok(self.total_scalar()? / math::pow(self.vol()?, (self.n - 2.0) / self.n))
    }

    /// Derivative of `eh` along `f + t·direction` at `t = 0`.
    pub fn eh_directional_derivative(&self, direction: &AffineFn2) -> Result<f64> {
        let g = self.moments()?.eh_gradient(self.n);
        Ok(g[0] * direction.a + g[1] * direction.b + g[2] * direction.c)
    }

    pub fn df(&self, phi: &PlConvex) -> Result<f64> {
        DfEvaluator::new(*self)?.df(phi)
    }
}

/// Evaluates many `DF` values for one context, caching `c`.
#[derive(Clone, Copy, Debug)]
pub struct DfEvaluator<'a> {
    ctx: FunctionalContext<'a>,
    moments: Moments,
}

/// One `DF` value split into its two terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DfParts {
    /// `2 ∫_∂Δ f^{1−n} φ dσ`
    pub boundary: f64,
    /// `c ∫_Δ f^{−1−n} φ dμ`
    pub interior: f64,
}

impl DfParts {
    pub fn value(&self) -> f64 {
        self.boundary - self.interior
    }
}

impl<'a> DfEvaluator<'a> {
    pub fn new(ctx: FunctionalContext<'a>) -> Result<Self> {
        Ok(Self { ctx, moments: ctx.moments()? })
    }

    pub fn context(&self) -> &FunctionalContext<'a> {
        &self.ctx
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }

    pub fn futaki(&self, phi: &AffineFn2) -> f64 {
        self.moments.futaki(phi)
    }

    pub fn df_parts(&self, phi: &PlConvex) -> Result<DfParts> {
        let FunctionalContext { delta, f, n, tol } = self.ctx;
        let c = self.moments.c_const();
        match phi {
            PlConvex::Affine(a) => {
                let [b0, b1, b2] = self.moments.bnd_1;
                let [i0, i1, i2] = self.moments.int_1;
                Ok(DfParts {
                    boundary: 2.0 * (a.c * b0 + a.a * b1 + a.b * b2),
                    interior: c * (a.c * i0 + a.a * i1 + a.b * i2),
                })
            }
            PlConvex::Spl(s) => {
                if let Some(a) = s.affine_part(delta) {
                    return self.df_parts(&PlConvex::Affine(a));
                }
                let w = Weight::Spl(*s);
                let bnd = integrate_boundary(delta, &w, &f, 1.0 - n, tol)?.value;
                let int = integrate_interior(delta, &w, &f, -1.0 - n, tol)?.value;
                Ok(DfParts { boundary: 2.0 * bnd, interior: c * int })
            }
        }
    }

    pub fn df(&self, phi: &PlConvex) -> Result<f64> {
        Ok(self.df_parts(phi)?.value())
    }
}
