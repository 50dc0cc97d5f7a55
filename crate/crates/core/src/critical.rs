//! Critical rays of the normalized Einstein-Hilbert functional.
//!
//! `EH` is homogeneous of degree 0 in the coefficients `(a, b, c)` of the
//! Killing potential, so critical points come in rays inside the positivity
//! cone. A ray is critical exactly when the Futaki invariant vanishes.
//!
//! The search works on the unit sphere from a Fibonacci grid of starts. Each
//! start runs twice: once as a Levenberg-Marquardt root search on the tangent
//! gradient, which finds saddles as readily as extrema, and once as a
//! saddle-free Newton descent, which reaches narrow minima the root search
//! tends to miss.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::functionals::FunctionalContext;
use crate::geometry::Point2;
use crate::linalg::{dot3, mat2_inv, mat2_mul, norm3, normalize3, sym2_abs, sym2_eigenvalues, tangent_basis, Mat2, Mat3};
use crate::math;
use crate::polytope::{is_positive_on, AffineFn2, Polytope2};
use crate::quadrature::{integrate_lattice_boundary, integrate_polygon};

/// `F(x) = x⁴ − 4x³ + 16x² − 16x + 4`.
pub fn quartic(x: f64) -> f64 {
    (((x - 4.0) * x + 16.0) * x - 16.0) * x + 4.0
}

fn quartic_derivative(x: f64) -> f64 {
    ((4.0 * x - 12.0) * x + 32.0) * x - 16.0
}

/// The root `α ≈ 0.386` of `F` bounding the existence range of family (c).
///
/// `F` has two roots in `(0, 1)`; this is the one in `[0, 1/2]`, where
/// `F(0) = 4 > 0 > F(1/2)`. Newton steps are kept inside the shrinking bracket.
pub fn quartic_alpha() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut x = 0.4;
    for _ in 0..200 {
        let fx = quartic(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / quartic_derivative(x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if math::abs(next - x) <= 1e-15 * x.max(1.0) || hi - lo < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

/// The closed-form critical families on `Δ_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyBranch {
    A,
    BPlus,
    BMinus,
    CPlus,
    CMinus,
}

impl FamilyBranch {
    pub const ALL: [FamilyBranch; 5] =
        [FamilyBranch::A, FamilyBranch::BPlus, FamilyBranch::BMinus, FamilyBranch::CPlus, FamilyBranch::CMinus];

    pub fn name(self) -> &'static str {
        match self {
            FamilyBranch::A => "a",
            FamilyBranch::BPlus => "b_plus",
            FamilyBranch::BMinus => "b_minus",
            FamilyBranch::CPlus => "c_plus",
            FamilyBranch::CMinus => "c_minus",
        }
    }

    /// Open interval of `p` on which the branch exists.
    pub fn p_range(self) -> (f64, f64) {
        match self {
            FamilyBranch::A => (0.0, 1.0),
            FamilyBranch::BPlus | FamilyBranch::BMinus => (8.0 / 9.0, 1.0),
            FamilyBranch::CPlus | FamilyBranch::CMinus => (0.0, quartic_alpha()),
        }
    }
}

impl fmt::Display for FamilyBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyBranch::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Domain(alloc::format!("unknown family branch '{s}'")))
    }
}

/// The printed coefficient triple of `branch` at `p`, with scale `C = 1`.
pub fn closed_form_family(p: f64, branch: FamilyBranch) -> Result<AffineFn2> {
    let (lo, hi) = branch.p_range();
    if !(p > lo && p < hi) {
        return Err(Error::Domain(alloc::format!("branch {branch} requires {lo} < p < {hi}, got p = {p}")));
    }
    Ok(match branch {
        FamilyBranch::A => {
            let r = math::sqrt(1.0 - p);
            AffineFn2::new(1.0, 0.0, p * (1.0 - r) / (2.0 * r + p - 2.0))
        }
        FamilyBranch::BPlus | FamilyBranch::BMinus => {
            let s = math::sqrt(9.0 * p * p - 8.0 * p);
            let s = if branch == FamilyBranch::BPlus { s } else { -s };
            AffineFn2::new(-1.0, 0.0, p * (3.0 * p + s) / (2.0 * (p + s)))
        }
        FamilyBranch::CPlus | FamilyBranch::CMinus => {
            let r = math::sqrt(quartic(p));
            let r = if branch == FamilyBranch::CPlus { r } else { -r };
            AffineFn2::new(-p * p + 4.0 * p - 2.0 + r, 2.0 * r, -p * p - 2.0 * p + 2.0 - r)
        }
    })
}

/// Unit-norm representative of the ray through `f`, oriented to be positive
/// on `delta` when either orientation is.
pub fn normalize_ray(f: &AffineFn2, delta: &Polytope2) -> AffineFn2 {
    let v = normalize3(&f.to_array());
    let g = AffineFn2::from_array(v);
    if !is_positive_on(&g, delta) && is_positive_on(&g.neg(), delta) {
        g.neg()
    } else {
        g
    }
}

/// The branch's potential as a positive unit ray on `Δ_p`, and whether the
/// printed triple had to be negated to get there.
pub fn positive_family_ray(p: f64, branch: FamilyBranch) -> Result<(AffineFn2, bool)> {
    let f = closed_form_family(p, branch)?;
    let delta = crate::polytope::delta_p(p)?;
    let ray = normalize_ray(&f, &delta);
    if !is_positive_on(&ray, &delta) {
        return Err(Error::NotPositive);
    }
    Ok((ray, ray.to_array()[0] * f.a < 0.0 || ray.c * f.c < 0.0))
}

/// Angle between two rays.
pub fn angular_distance(f: &AffineFn2, g: &AffineFn2) -> f64 {
    let a = normalize3(&f.to_array());
    let b = normalize3(&g.to_array());
    let cross = crate::linalg::cross3(&a, &b);
    math::atan2(norm3(&cross), dot3(&a, &b))
}

/// `EH` and its coefficient gradient in the order `(a, b, c)`.
pub fn eh_value_and_gradient(delta: &Polytope2, n: f64, f: &AffineFn2, tol: f64) -> Result<(f64, [f64; 3])> {
    let ctx = FunctionalContext::new(delta, *f, n, tol)?;
    let m = ctx.moments()?;
    Ok((m.eh(n), m.eh_gradient(n)))
}

/// Value, gradient and Hessian of `EH` in coefficient space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EhJet {
    pub value: f64,
    pub gradient: [f64; 3],
    pub hessian: Mat3,
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn monomials(p: Point2) -> [f64; 3] {
    [p.x, p.y, 1.0]
}

fn jet_integrands(w0: f64, w1: f64, w2: f64, x: [f64; 3]) -> [f64; 10] {
    let mut out = [0.0; 10];
    out[0] = w0;
    for i in 0..3 {
        out[1 + i] = w1 * x[i];
    }
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        out[4 + k] = w2 * x[i] * x[j];
    }
    out
}

/// Second-order jet of `EH` at `f`.
pub fn eh_jet(delta: &Polytope2, n: f64, f: &AffineFn2, tol: f64) -> Result<EhJet> {
    FunctionalContext::new(delta, *f, n, tol)?;
    let bnd = integrate_lattice_boundary(
        delta,
        None,
        |p| {
            let v = f.eval(p);
            let w2 = math::pow(v, -n);
            jet_integrands(w2 * v * v, w2 * v, w2, monomials(p))
        },
        tol,
    )?
    .values;
    let int = integrate_polygon(
        delta.polygon(),
        |p| {
            let v = f.eval(p);
            let w0 = math::pow(v, -n);
            let w1 = w0 / v;
            jet_integrands(w0, w1, w1 / v, monomials(p))
        },
        tol,
    )?
    .values;
    let q = (n - 2.0) / n;
    let b = bnd[0];
    let v = int[0];
    let mut bi = [0.0; 3];
    let mut vi = [0.0; 3];
    for i in 0..3 {
        bi[i] = (2.0 - n) * bnd[1 + i];
        vi[i] = -n * int[1 + i];
    }
    let mut bij = [[0.0; 3]; 3];
    let mut vij = [[0.0; 3]; 3];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        bij[i][j] = (2.0 - n) * (1.0 - n) * bnd[4 + k];
        bij[j][i] = bij[i][j];
        vij[i][j] = n * (n + 1.0) * int[4 + k];
        vij[j][i] = vij[i][j];
    }
    let vq = math::pow(v, -q);
    let vq1 = vq / v;
    let vq2 = vq1 / v;
    let mut gradient = [0.0; 3];
    let mut hessian = [[0.0; 3]; 3];
    for i in 0..3 {
        gradient[i] = 2.0 * (bi[i] * vq - q * b * vq1 * vi[i]);
        for j in 0..3 {
            hessian[i][j] = 2.0
                * (bij[i][j] * vq - q * vq1 * (bi[i] * vi[j] + bi[j] * vi[i]) + q * (q + 1.0) * b * vq2 * vi[i] * vi[j]
                    - q * b * vq1 * vij[i][j]);
        }
    }
    Ok(EhJet { value: 2.0 * b * vq, gradient, hessian })
}

/// Tangent gradient and projected Hessian on the unit sphere at `x`.
fn project(jet: &EhJet, t: &[[f64; 3]; 2]) -> ([f64; 2], Mat2) {
    let g = [dot3(&t[0], &jet.gradient), dot3(&t[1], &jet.gradient)];
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += t[a][i] * jet.hessian[i][j] * t[b][j];
                }
            }
            h[a][b] = acc;
        }
    }
    let off = 0.5 * (h[0][1] + h[1][0]);
    h[0][1] = off;
    h[1][0] = off;
    (g, h)
}

/// Type of a critical point from the two projected Hessian eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Minimum,
    Saddle,
    Maximum,
    Degenerate,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Minimum => "minimum",
            Classification::Saddle => "saddle",
            Classification::Maximum => "maximum",
            Classification::Degenerate => "degenerate",
        }
    }
}

const CLASSIFY_TOL: f64 = 1e-6;

fn classify(ev: [f64; 2]) -> Classification {
    if ev.iter().any(|e| math::abs(*e) < CLASSIFY_TOL) {
        Classification::Degenerate
    } else if ev[0] > 0.0 {
        Classification::Minimum
    } else if ev[1] < 0.0 {
        Classification::Maximum
    } else {
        Classification::Saddle
    }
}

/// A verified critical ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalRay {
    /// Unit-norm potential, positive on the polytope.
    pub f: AffineFn2,
    pub eh: f64,
    /// `‖∇EH‖ / |EH|` at the unit representative.
    pub grad_norm: f64,
    /// `(|Fut(1)|, |Fut(μ1)|, |Fut(μ2)|)`.
    pub futaki_residuals: [f64; 3],
    /// `|d_const|·vol`, the natural size of a Futaki value.
    pub futaki_scale: f64,
    pub c_const: f64,
    pub d_const: f64,
    /// `|c_const − d_const|`.
    pub cd_gap: f64,
    /// Eigenvalues of the projected Hessian divided by `|EH|`, ascending.
    pub eigenvalues: [f64; 2],
    pub classification: Classification,
}

impl CriticalRay {
    /// Largest Futaki residual relative to `futaki_scale`.
    pub fn relative_futaki(&self) -> f64 {
        self.futaki_residuals.iter().fold(0.0f64, |m, r| m.max(*r)) / self.futaki_scale
    }
}

/// Parameters of the multistart search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Number of Fibonacci sphere points before the positivity filter.
    pub starts: usize,
    pub max_iterations: usize,
    /// Acceptance threshold on `‖∇EH‖ / |EH|`.
    pub convergence_tol: f64,
    /// Quadrature tolerance near convergence and for verification.
    pub quad_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { starts: 200, max_iterations: 80, convergence_tol: 1e-9, quad_tol: 1e-11 }
    }
}

/// Starts must clear the cone boundary by this much (unit-norm rays).
const START_MARGIN: f64 = 1e-3;
/// Iterates closer than this to the cone boundary are rejected.
const BARRIER: f64 = 1e-8;
const TRUST_RADIUS: f64 = 0.2;
const DEDUP_ANGLE: f64 = 1e-6;

/// Fibonacci sphere points whose potential is positive on `delta` with margin.
pub fn search_starts(delta: &Polytope2, config: &SearchConfig) -> Vec<AffineFn2> {
    let m = config.starts.max(1);
    let golden = core::f64::consts::PI * (3.0 - math::sqrt(5.0));
    (0..m)
        .filter_map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
            let r = math::sqrt((1.0 - z * z).max(0.0));
            let th = golden * i as f64;
            let f = AffineFn2::new(r * math::cos(th), r * math::sin(th), z);
            (f.min_over(delta.vertices()) > START_MARGIN).then_some(f)
        })
        .collect()
}

fn verify_ray(delta: &Polytope2, n: f64, f: &AffineFn2, tol: f64) -> Result<CriticalRay> {
    let jet = eh_jet(delta, n, f, tol)?;
    let ctx = FunctionalContext::new(delta, *f, n, tol)?;
    let m = ctx.moments()?;
    let t = tangent_basis(&f.to_array());
    let (_, hr) = project(&jet, &t);
    let ev = sym2_eigenvalues(&hr).map(|e| e / math::abs(jet.value));
    let futaki = m.futaki_basis().map(math::abs);
    let (c, d) = (m.c_const(), m.d_const());
    Ok(CriticalRay {
        f: *f,
        eh: jet.value,
        grad_norm: norm3(&jet.gradient) / math::abs(jet.value),
        futaki_residuals: futaki,
        futaki_scale: math::abs(d) * m.vol(),
        c_const: c,
        d_const: d,
        cd_gap: math::abs(c - d),
        eigenvalues: ev,
        classification: classify(ev),
    })
}

/// Diagnostics for an arbitrary potential, critical or not.
pub fn diagnose(delta: &Polytope2, n: f64, f: &AffineFn2, tol: f64) -> Result<CriticalRay> {
    verify_ray(delta, n, &normalize_ray(f, delta), tol)
}

fn barrier_ok(delta: &Polytope2, x: &[f64; 3]) -> bool {
    AffineFn2::from_array(*x).min_over(delta.vertices()) > BARRIER
}

/// How an iteration picks its steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Gauss-Newton on the tangent gradient: converges to any nondegenerate
    /// critical point, saddles included.
    Root,
    /// Saddle-free Newton descent on `EH` (Hessian replaced by its absolute
    /// value) until the gradient is small, then a `Root` polish.
    Descent,
}

/// Runs both search modes from one start and returns the converged rays.
pub fn refine_start(delta: &Polytope2, n: f64, start: &AffineFn2, config: &SearchConfig) -> Result<Vec<CriticalRay>> {
    let mut out = Vec::new();
    for mode in [SearchMode::Root, SearchMode::Descent] {
        if let Some(r) = refine_start_with(delta, n, start, config, mode)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// Gradient size at which descent hands over to the `Root` polish and the
/// quadrature switches to `quad_tol`.
const POLISH_GRAD: f64 = 1e-4;

/// One trust-region Levenberg-Marquardt run on the unit sphere. Returns
/// `Ok(None)` when the start does not converge.
pub fn refine_start_with(
    delta: &Polytope2,
    n: f64,
    start: &AffineFn2,
    config: &SearchConfig,
    mode: SearchMode,
) -> Result<Option<CriticalRay>> {
    let mut x = normalize3(&start.to_array());
    if !barrier_ok(delta, &x) {
        return Ok(None);
    }
    let jet_at = |x: &[f64; 3], tol: f64| match eh_jet(delta, n, &AffineFn2::from_array(*x), tol) {
        Ok(j) => Ok(Some(j)),
        Err(Error::ToleranceFailure { .. }) | Err(Error::NotPositive) => Ok(None),
        Err(e) => Err(e),
    };
    let mut tol = 1e-8f64.max(config.quad_tol);
    let Some(mut jet) = jet_at(&x, tol)? else { return Ok(None) };
    let mut phase = mode;
    let mut lambda = 1e-3;
    for _ in 0..config.max_iterations {
        let t = tangent_basis(&x);
        let (g, hr) = project(&jet, &t);
        let res = g[0] * g[0] + g[1] * g[1];
        let gn = math::sqrt(res) / math::abs(jet.value);
        if gn < POLISH_GRAD && tol > config.quad_tol {
            tol = config.quad_tol;
            let Some(j) = jet_at(&x, tol)? else { return Ok(None) };
            jet = j;
            continue;
        }
        if gn < config.convergence_tol {
            break;
        }
        if phase == SearchMode::Descent && gn < POLISH_GRAD {
            phase = SearchMode::Root;
            lambda = 1e-3;
        }
        let (m0, rhs) = match phase {
            SearchMode::Root => {
                let h2 = mat2_mul(&hr, &hr);
                (h2, [-(hr[0][0] * g[0] + hr[0][1] * g[1]), -(hr[1][0] * g[0] + hr[1][1] * g[1])])
            }
            SearchMode::Descent => (sym2_abs(&hr), [-g[0], -g[1]]),
        };
        let damp = m0[0][0] + m0[1][1];
        let mut accepted = false;
        for _ in 0..40 {
            let mut m = m0;
            m[0][0] += lambda * damp;
            m[1][1] += lambda * damp;
            let Some(inv) = mat2_inv(&m) else {
                lambda *= 10.0;
                continue;
            };
            let mut s = [inv[0][0] * rhs[0] + inv[0][1] * rhs[1], inv[1][0] * rhs[0] + inv[1][1] * rhs[1]];
            let len = math::sqrt(s[0] * s[0] + s[1] * s[1]);
            if len > TRUST_RADIUS {
                s = [s[0] * TRUST_RADIUS / len, s[1] * TRUST_RADIUS / len];
            }
            let mut y = [0.0; 3];
            for i in 0..3 {
                y[i] = x[i] + s[0] * t[0][i] + s[1] * t[1][i];
            }
            let y = normalize3(&y);
            if !barrier_ok(delta, &y) {
                lambda *= 10.0;
                continue;
            }
            let Some(jy) = jet_at(&y, tol)? else {
                lambda *= 10.0;
                continue;
            };
            let better = match phase {
                SearchMode::Root => {
                    let (gy, _) = project(&jy, &tangent_basis(&y));
                    gy[0] * gy[0] + gy[1] * gy[1] < res
                }
                SearchMode::Descent => jy.value < jet.value,
            };
            if better {
                x = y;
                jet = jy;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            if tol > config.quad_tol {
                tol = config.quad_tol;
                let Some(j) = jet_at(&x, tol)? else { return Ok(None) };
                jet = j;
                continue;
            }
            if phase == SearchMode::Descent {
                phase = SearchMode::Root;
                lambda = 1e-3;
                continue;
            }
            break;
        }
    }
    let ray = match verify_ray(delta, n, &AffineFn2::from_array(x), config.quad_tol) {
        Ok(r) => r,
        Err(Error::ToleranceFailure { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok((ray.grad_norm < config.convergence_tol).then_some(ray))
}

/// Merges rays closer than `1e−6` in angle, keeping the smallest gradient,
/// and sorts the result by coefficients.
pub fn merge_rays(found: impl IntoIterator<Item = CriticalRay>) -> Vec<CriticalRay> {
    let mut out: Vec<CriticalRay> = Vec::new();
    for r in found {
        match out.iter_mut().find(|o| angular_distance(&o.f, &r.f) < DEDUP_ANGLE) {
            Some(o) => {
                if r.grad_norm < o.grad_norm {
                    *o = r;
                }
            }
            None => out.push(r),
        }
    }
    out.sort_by(|a, b| {
        let (x, y) = (a.f.to_array(), b.f.to_array());
        x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])).then(x[2].total_cmp(&y[2]))
    });
    out
}

/// Multistart search for critical rays of `EH` on `delta`, sequentially.
pub fn find_critical_rays(delta: &Polytope2, n: f64, config: &SearchConfig) -> Result<Vec<CriticalRay>> {
    check_config(n, config)?;
    let mut found = Vec::new();
    for s in search_starts(delta, config) {
        found.extend(refine_start(delta, n, &s, config)?);
    }
    Ok(merge_rays(found))
}

/// Validates `n` and the search parameters.
pub fn check_config(n: f64, config: &SearchConfig) -> Result<()> {
    if !n.is_finite() || n == 0.0 || n == 1.0 || n == 2.0 {
        return Err(Error::Domain(alloc::format!("n must be finite and not 0, 1 or 2, got {n}")));
    }
    if config.starts == 0 || !(config.convergence_tol > 0.0) || !(config.quad_tol > 0.0) {
        return Err(Error::Domain("search needs at least one start and positive tolerances".into()));
    }
    Ok(())
}

/// Outcome of the slice check at one potential.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceReport {
    /// `max |Fut(x_i)| / (|d|·vol)` over `x ∈ {1, μ1, μ2}`.
    pub futaki_residual: f64,
    /// `‖∇vol − λ∇d‖ / ‖∇vol‖` with the best multiplier `λ`.
    pub slice_residual: f64,
    pub multiplier: f64,
    pub c_const: f64,
    pub d_const: f64,
    /// Both residuals are on the same side of `tol`.
    pub pass: bool,
    pub note: String,
}

/// Checks that `vol` is stationary on the slice `{d_const = d_const(f)}`
/// exactly when the Futaki invariant vanishes at `f`.
pub fn verify_slice_principle(delta: &Polytope2, n: f64, f: &AffineFn2, tol: f64) -> Result<SliceReport> {
    let ctx = FunctionalContext::new(delta, *f, n, 1e-12)?;
    let m = ctx.moments()?;
    let d = m.d_const();
    if math::abs(d) < 1e-10 {
        return Err(Error::Unsupported("slice check needs d_const ≠ 0".into()));
    }
    let v = m.vol();
    let b = m.bnd_2;
    // coefficient order (a, b, c) ↔ moments order (μ1, μ2, 1)
    let idx = [1, 2, 0];
    let grad_v = idx.map(|i| -n * m.int_1[i]);
    let grad_b = idx.map(|i| (2.0 - n) * m.bnd_1[i]);
    let grad_d: [f64; 3] = [0, 1, 2].map(|i| 2.0 / v * (grad_b[i] - b / v * grad_v[i]));
    let lambda = dot3(&grad_v, &grad_d) / dot3(&grad_d, &grad_d);
    let resid: [f64; 3] = [0, 1, 2].map(|i| grad_v[i] - lambda * grad_d[i]);
    let slice_residual = norm3(&resid) / norm3(&grad_v);
    let futaki_residual = m.futaki_basis().iter().fold(0.0f64, |a, x| a.max(math::abs(*x))) / (math::abs(d) * v);
    let crit_fut = futaki_residual < tol;
    let crit_slice = slice_residual < tol;
    let pass = crit_fut == crit_slice;
    let note = match (crit_fut, crit_slice) {
        (true, true) => "critical: Futaki vanishes and vol is stationary on the slice",
        (false, false) => "not critical: Futaki nonzero and vol not stationary on the slice",
        _ => "mismatch between Futaki and slice stationarity",
    };
    Ok(SliceReport {
        futaki_residual,
        slice_residual,
        multiplier: lambda,
        c_const: m.c_const(),
        d_const: d,
        pass,
        note: note.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::delta_p;

    #[test]
    fn quartic_root() {
        let a = quartic_alpha();
        assert!(quartic(a).abs() < 1e-10);
        assert!((a - 0.386).abs() < 5e-4);
        assert!((quartic(0.1) - 2.5561).abs() < 1e-12);
    }

    #[test]
    fn family_c_minus_at_tenth() {
        let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
        assert!((f.a + 3.20878).abs() < 1e-5);
        assert!((f.b + 3.19756).abs() < 1e-5);
        assert!((f.c - 3.38878).abs() < 1e-5);
        let d = delta_p(0.1).unwrap();
        assert!(is_positive_on(&f, &d));
        let vals: Vec<f64> = d.vertices().iter().map(|&v| f.eval(v)).collect();
        for (v, want) in vals.iter().zip([3.389, 3.068, 0.190, 0.191]) {
            assert!((v - want).abs() < 1.5e-3, "{v}");
        }
    }

    #[test]
    fn family_ranges() {
        assert!(closed_form_family(0.85, FamilyBranch::BPlus).is_err());
        assert!(closed_form_family(0.5, FamilyBranch::CPlus).is_err());
        assert!(closed_form_family(1.0, FamilyBranch::A).is_err());
        assert!(closed_form_family(0.95, FamilyBranch::BPlus).is_ok());
    }

    #[test]
    fn family_b_values() {
        let f = closed_form_family(0.95, FamilyBranch::BPlus).unwrap();
        assert!((f.c - 1.0145).abs() < 1e-4);
        let g = closed_form_family(0.95, FamilyBranch::BMinus).unwrap();
        assert!((g.c - 4.448).abs() < 1e-3);
    }

    #[test]
    fn family_a_needs_a_sign_flip() {
        let f = closed_form_family(0.5, FamilyBranch::A).unwrap();
        assert!((f.c + 1.7071).abs() < 1e-4);
        let d = delta_p(0.5).unwrap();
        assert!(!is_positive_on(&f, &d));
        let (ray, flipped) = positive_family_ray(0.5, FamilyBranch::A).unwrap();
        assert!(flipped && is_positive_on(&ray, &d));
        let (_, flipped) = positive_family_ray(0.1, FamilyBranch::CMinus).unwrap();
        assert!(!flipped);
    }

    #[test]
    fn branch_names_round_trip() {
        for b in FamilyBranch::ALL {
            assert_eq!(b.name().parse::<FamilyBranch>().unwrap(), b);
        }
        assert!("d".parse::<FamilyBranch>().is_err());
    }

    #[test]
    fn closed_forms_are_critical() {
        for (p, b) in [
            (0.1, FamilyBranch::CMinus),
            (0.1, FamilyBranch::CPlus),
            (0.3, FamilyBranch::A),
            (0.95, FamilyBranch::BPlus),
            (0.95, FamilyBranch::BMinus),
        ] {
            let d = delta_p(p).unwrap();
            let (f, _) = positive_family_ray(p, b).unwrap();
            let r = diagnose(&d, 4.0, &f, 1e-11).unwrap();
            assert!(r.grad_norm < 1e-6, "{b} {}", r.grad_norm);
            assert!(r.relative_futaki() < 1e-6);
            assert!(r.cd_gap < 1e-6 * r.d_const.abs());
        }
    }

    #[test]
    fn constant_potential_is_not_critical_on_delta_p() {
        let d = delta_p(0.5).unwrap();
        let (_, g) = eh_value_and_gradient(&d, 4.0, &AffineFn2::constant(1.0), 1e-11).unwrap();
        assert!(norm3(&g) > 1e-2);
    }

    #[test]
    fn euler_relation() {
        let d = delta_p(0.3).unwrap();
        for f in [AffineFn2::new(0.3, 0.1, 1.0), AffineFn2::new(-0.5, 0.4, 0.9)] {
            let (_, g) = eh_value_and_gradient(&d, 4.0, &f, 1e-11).unwrap();
            assert!(dot3(&g, &f.to_array()).abs() < 1e-8 * norm3(&g));
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let d = delta_p(0.4).unwrap();
        let f = AffineFn2::new(0.3, -0.2, 0.8);
        let n = 4.0;
        let jet = eh_jet(&d, n, &f, 1e-12).unwrap();
        let (v, g) = eh_value_and_gradient(&d, n, &f, 1e-12).unwrap();
        assert!((jet.value - v).abs() < 1e-11 * v);
        for i in 0..3 {
            assert!((jet.gradient[i] - g[i]).abs() < 1e-9 * norm3(&g));
        }
        let h = 1e-5;
        for j in 0..3 {
            let mut xp = f.to_array();
            let mut xm = f.to_array();
            xp[j] += h;
            xm[j] -= h;
            let (_, gp) = eh_value_and_gradient(&d, n, &AffineFn2::from_array(xp), 1e-13).unwrap();
            let (_, gm) = eh_value_and_gradient(&d, n, &AffineFn2::from_array(xm), 1e-13).unwrap();
            for i in 0..3 {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                assert!((fd - jet.hessian[i][j]).abs() < 1e-5 * jet.hessian[i][j].abs().max(1.0), "{i}{j}");
            }
        }
        // homogeneity: H x = −g
        let x = f.to_array();
        for i in 0..3 {
            let hx: f64 = (0..3).map(|j| jet.hessian[i][j] * x[j]).sum();
            assert!((hx + jet.gradient[i]).abs() < 1e-8 * norm3(&jet.gradient));
        }
    }

    #[test]
    fn search_finds_both_case_c_rays() {
        let d = delta_p(0.1).unwrap();
        let config = SearchConfig { starts: 40, ..SearchConfig::default() };
        let rays = find_critical_rays(&d, 4.0, &config).unwrap();
        for b in [FamilyBranch::CMinus, FamilyBranch::CPlus, FamilyBranch::A] {
            let (f, _) = positive_family_ray(0.1, b).unwrap();
            assert!(rays.iter().any(|r| angular_distance(&r.f, &f) < 1e-6), "{b} missing from {rays:?}");
        }
    }

    #[test]
    fn square_center_is_critical() {
        let sq = Polytope2::from_vertices(&[
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let r = diagnose(&sq, 4.0, &AffineFn2::constant(1.0), 1e-11).unwrap();
        assert!(r.grad_norm < 1e-10);
    }

    #[test]
    fn slice_principle_examples() {
        let d = delta_p(0.1).unwrap();
        let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
        let r = verify_slice_principle(&d, 4.0, &f, 1e-5).unwrap();
        assert!(r.pass && r.futaki_residual < 1e-5 && r.slice_residual < 1e-5, "{r:?}");
        let r = verify_slice_principle(&d, 4.0, &AffineFn2::new(0.3, 0.2, 1.0), 1e-5).unwrap();
        assert!(r.pass && r.futaki_residual > 1e-3 && r.slice_residual > 1e-3, "{r:?}");
        let s = Polytope2::from_vertices(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)])
            .unwrap();
        let r = verify_slice_principle(&s, 4.0, &AffineFn2::constant(1.0), 1e-5).unwrap();
        assert!(r.pass && r.futaki_residual < 1e-10, "{r:?}");
    }
}
