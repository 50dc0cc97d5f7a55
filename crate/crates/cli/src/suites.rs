//! Randomized invariant suites behind `verify --suite`.
//!
//! Every suite draws from a ChaCha generator with a fixed seed, so reruns
//! print the same numbers.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use toric_kstab_core::abreu::{
    canonical_sample, divergence_grouped, divergence_product_rule, integration_by_parts, reduction_residual,
};
use toric_kstab_core::critical::{verify_slice_principle, SearchConfig};
use toric_kstab_core::functionals::{DfEvaluator, FunctionalContext, PlConvex};
use toric_kstab_core::polytope::{delta_p, unimodular_transform};
use toric_kstab_core::quadrature::{integrate_boundary, integrate_interior, Poly2};
use toric_kstab_core::{AffineFn2, IntMatrix2, Point2, Polytope2, SplFn, Weight};

use crate::error::CliResult;
use crate::parallel::find_critical_rays;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Abreu,
    Slice,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Identities, Suite::Abreu, Suite::Slice];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Abreu => "abreu",
            Suite::Slice => "slice",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}, expected identities, abreu or slice"))
    }
}

/// One line of suite output.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteItem {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for SuiteItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> CliResult<Vec<SuiteItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Identities => identities(&mut rng),
        Suite::Abreu => abreu(&mut rng),
        Suite::Slice => slice(&mut rng),
    }
}

// ---- random inputs ----

fn mat_mul(a: &IntMatrix2, b: &IntMatrix2) -> IntMatrix2 {
    let (x, y) = (a.m, b.m);
    IntMatrix2::new([
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ])
}

/// A product of three random generators of `GL(2, ℤ)`.
pub fn random_unimodular(rng: &mut impl Rng) -> IntMatrix2 {
    const GENS: [[[i64; 2]; 2]; 6] = [
        [[1, 1], [0, 1]],
        [[1, -1], [0, 1]],
        [[1, 0], [1, 1]],
        [[1, 0], [-1, 1]],
        [[0, -1], [1, 0]],
        [[1, 0], [0, -1]],
    ];
    (0..3).fold(IntMatrix2::IDENTITY, |m, _| mat_mul(&m, &IntMatrix2::new(GENS[rng.gen_range(0..GENS.len())])))
}

/// Hirzebruch trapezoid `(0,0), (a,0), (a−kh, h), (0,h)` moved by a random
/// unimodular map and translation. Always Delzant.
pub fn random_trapezoid(rng: &mut impl Rng) -> Polytope2 {
    let k = rng.gen_range(0..3) as f64;
    let h = rng.gen_range(0.3..1.5);
    let a = k * h + rng.gen_range(0.2..2.0);
    let base = Polytope2::from_vertices(&[
        Point2::new(0.0, 0.0),
        Point2::new(a, 0.0),
        Point2::new(a - k * h, h),
        Point2::new(0.0, h),
    ])
    .expect("trapezoid is convex");
    let t = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    unimodular_transform(&base, &random_unimodular(rng), t).expect("generators are unimodular")
}

/// Affine function with minimum over `delta` in `[0.2, 1.5]` and a gradient
/// comparable to its values.
pub fn random_positive(rng: &mut impl Rng, delta: &Polytope2) -> AffineFn2 {
    let scale = delta.polygon().diameter();
    let g = AffineFn2::new(rng.gen_range(-1.0..1.0) / scale, rng.gen_range(-1.0..1.0) / scale, 0.0);
    let lift = rng.gen_range(0.2..1.5) - g.min_over(delta.vertices());
    AffineFn2::new(g.a, g.b, lift)
}

pub fn random_affine(rng: &mut impl Rng) -> AffineFn2 {
    AffineFn2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// A uniform point of `delta` pulled toward the centroid by `margin`.
pub fn random_interior_point(rng: &mut impl Rng, delta: &Polytope2, margin: f64) -> Point2 {
    let v = delta.vertices();
    let tri_area = |i: usize| 0.5 * (v[i] - v[0]).cross(v[i + 1] - v[0]);
    let total: f64 = (1..v.len() - 1).map(tri_area).sum();
    let mut pick = rng.gen_range(0.0..total);
    let mut i = 1;
    while i < v.len() - 2 && pick > tri_area(i) {
        pick -= tri_area(i);
        i += 1;
    }
    let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
    if s + t > 1.0 {
        (s, t) = (1.0 - s, 1.0 - t);
    }
    let p = v[0] + (v[i] - v[0]) * s + (v[i + 1] - v[0]) * t;
    delta.polygon().centroid().lerp(p, 1.0 - margin)
}

/// Unit-gradient affine function vanishing on the line through two random
/// interior points: its crease is never empty.
pub fn random_crease(rng: &mut impl Rng, delta: &Polytope2) -> AffineFn2 {
    loop {
        let u = random_interior_point(rng, delta, 0.05);
        let v = random_interior_point(rng, delta, 0.05);
        let w = v - u;
        if w.norm() > 1e-3 * delta.polygon().diameter() {
            let nrm = Point2::new(-w.y, w.x) * (1.0 / w.norm());
            return AffineFn2::new(nrm.x, nrm.y, -nrm.dot(u));
        }
    }
}

struct Sample {
    delta: Polytope2,
    f: AffineFn2,
    n: f64,
    phi: AffineFn2,
    crease: AffineFn2,
    map: (IntMatrix2, Point2),
}

fn samples(rng: &mut impl Rng, count: usize) -> Vec<Sample> {
    (0..count)
        .map(|_| {
            let delta = random_trapezoid(rng);
            let f = random_positive(rng, &delta);
            let n = rng.gen_range(2.5..8.0);
            let phi = random_affine(rng);
            let crease = random_crease(rng, &delta);
            let map = (random_unimodular(rng), Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
            Sample { delta, f, n, phi, crease, map }
        })
        .collect()
}

/// Tallies `(error, tolerance)` pairs into one suite line.
fn item(name: &'static str, what: &str, errors: &[(f64, f64)]) -> SuiteItem {
    let worst = errors.iter().fold(0.0f64, |m, (e, _)| m.max(*e));
    let failed = errors.iter().filter(|(e, tol)| !(e <= tol)).count();
    let tol = errors.first().map_or(0.0, |x| x.1);
    SuiteItem {
        name,
        pass: failed == 0 && !errors.is_empty(),
        detail: format!("{what}: {} cases, worst {worst:.3e}, tolerance {tol:.0e}, {failed} failed", errors.len()),
    }
}

/// Passes when every value exceeds `threshold`.
fn above(name: &'static str, what: &str, values: &[f64], threshold: f64) -> SuiteItem {
    let low = values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let failed = values.iter().filter(|v| !(**v > threshold)).count();
    SuiteItem {
        name,
        pass: failed == 0 && !values.is_empty(),
        detail: format!("{what}: {} cases, smallest {low:.3e}, required > {threshold:.0e}, {failed} failed", values.len()),
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

// ---- identities ----

const ID_TOL: f64 = 1e-12;

struct IdentityErrors {
    fut_const: f64,
    eh_dvol: f64,
    df_fut: f64,
    df_scaling: [f64; 2],
    eh_homog: [f64; 2],
}

fn identity_errors(s: &Sample) -> CliResult<IdentityErrors> {
    let (d, f, n) = (&s.delta, s.f, s.n);
    let ev = DfEvaluator::new(FunctionalContext::new(d, f, n, ID_TOL)?)?;
    let m = *ev.moments();
    let fut_const = m.futaki(&AffineFn2::constant(1.0)).abs() / (2.0 * m.bnd_1[0]);
    let eh = m.eh(n);
    let eh_dvol = rel(eh, m.d_const() * m.vol().powf(2.0 / n), eh.abs());

    // DF of an affine φ by direct quadrature against the Futaki moments
    let w = Weight::affine(&s.phi);
    let bnd = 2.0 * integrate_boundary(d, &w, &f, 1.0 - n, ID_TOL)?.value;
    let int = m.c_const() * integrate_interior(d, &w, &f, -1.0 - n, ID_TOL)?.value;
    let df_fut = rel(bnd - int, m.futaki(&s.phi), bnd.abs().max(int.abs()));

    let spl = PlConvex::Spl(SplFn::new(s.crease, d));
    let parts = ev.df_parts(&spl)?;
    let mut df_scaling = [0.0; 2];
    let mut eh_homog = [0.0; 2];
    for (k, c) in [0.5, 2.0].into_iter().enumerate() {
        let evc = DfEvaluator::new(FunctionalContext::new(d, f.scale(c), n, ID_TOL)?)?;
        let want = c.powf(1.0 - n);
        let scale = want * parts.boundary.abs().max(parts.interior.abs());
        df_scaling[k] = rel(evc.df(&spl)?, want * parts.value(), scale);
        eh_homog[k] = rel(evc.moments().eh(n), eh, eh.abs());
    }
    Ok(IdentityErrors { fut_const, eh_dvol, df_fut, df_scaling, eh_homog })
}

fn unimodular_errors(s: &Sample) -> CliResult<[f64; 3]> {
    let (u, t) = &s.map;
    let d2 = unimodular_transform(&s.delta, u, *t)?;
    let push = |g: &AffineFn2| g.push_forward(u, *t);
    let ev1 = DfEvaluator::new(FunctionalContext::new(&s.delta, s.f, s.n, ID_TOL)?)?;
    let ev2 = DfEvaluator::new(FunctionalContext::new(&d2, push(&s.f)?, s.n, ID_TOL)?)?;
    let fut_scale = ev1.moments().d_const().abs() * ev1.moments().vol();
    let fut = rel(ev1.futaki(&s.phi), ev2.futaki(&push(&s.phi)?), fut_scale);
    let p1 = ev1.df_parts(&PlConvex::Spl(SplFn::new(s.crease, &s.delta)))?;
    let p2 = ev2.df_parts(&PlConvex::Spl(SplFn::new(push(&s.crease)?, &d2)))?;
    let df = rel(p1.value(), p2.value(), p1.boundary.abs().max(p1.interior.abs()));
    let (e1, e2) = (ev1.moments().eh(s.n), ev2.moments().eh(s.n));
    Ok([fut, df, rel(e1, e2, e1.abs())])
}

fn identities(rng: &mut ChaCha8Rng) -> CliResult<Vec<SuiteItem>> {
    let all = samples(rng, 100);
    let errs = all.par_iter().map(identity_errors).collect::<CliResult<Vec<_>>>()?;
    let uni = all[..20].par_iter().map(unimodular_errors).collect::<CliResult<Vec<_>>>()?;
    let col = |tol: f64, get: &dyn Fn(&IdentityErrors) -> Vec<f64>| -> Vec<(f64, f64)> {
        errs.iter().flat_map(get).map(|e| (e, tol)).collect()
    };
    let uni_col = |tol: f64| -> Vec<(f64, f64)> { uni.iter().flatten().map(|e| (*e, tol)).collect() };
    Ok(vec![
        item("futaki_constant", "|Fut(1)| / 2∫_∂ f^{1-n}", &col(1e-10, &|e| vec![e.fut_const])),
        item("eh_equals_d_vol", "eh vs d·vol^{2/n}, relative", &col(1e-9, &|e| vec![e.eh_dvol])),
        item("df_equals_futaki_affine", "DF(φ) by quadrature vs Fut(φ), relative", &col(1e-10, &|e| vec![e.df_fut])),
        item("df_scaling", "DF(Cf) vs C^{1-n} DF(f), C = 0.5, 2, relative", &col(1e-9, &|e| e.df_scaling.to_vec())),
        item("eh_homogeneity", "eh(Cf) vs eh(f), C = 0.5, 2, relative", &col(1e-9, &|e| e.eh_homog.to_vec())),
        item("unimodular_invariance", "Fut, DF, eh under 20 unimodular maps, relative", &uni_col(1e-8)),
    ])
}

// ---- abreu ----

fn abreu(rng: &mut ChaCha8Rng) -> CliResult<Vec<SuiteItem>> {
    let simplex =
        Polytope2::from_vertices(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)])?;
    let mut simplex_err = Vec::new();
    for _ in 0..100 {
        let p = random_interior_point(rng, &simplex, 0.02);
        let s = canonical_sample(&simplex, p)?;
        let (x, y) = (p.x, p.y);
        let h = [[2.0 * (x - x * x), -2.0 * x * y], [-2.0 * x * y, 2.0 * (y - y * y)]];
        let mut herr = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                herr = herr.max((s.h[i][j] - h[i][j]).abs());
            }
        }
        simplex_err.push(((s.s_j - 12.0).abs().max(herr), 1e-8));
    }

    // pointwise checks on random Delzant quadrilaterals
    let mut reduction = Vec::new();
    let mut expansion = Vec::new();
    let mut control = Vec::new();
    for i in 0..1000 {
        let d = random_trapezoid(rng);
        let f = random_positive(rng, &d);
        let n = rng.gen_range(2.5..8.0);
        let p = random_interior_point(rng, &d, 0.02);
        let s = canonical_sample(&d, p)?;
        reduction.push((reduction_residual(&s, &f, -2.0, n)?, 1e-8));
        let alpha = rng.gen_range(-6.0..6.0);
        let (a, b) = (divergence_product_rule(&s, &f, alpha)?, divergence_grouped(&s, &f, alpha)?);
        expansion.push((rel(a, b, a.abs().max(b.abs())), 1e-8));
        if i < 100 {
            control.push(reduction_residual(&s, &f, -1.0, 4.0)?);
        }
    }

    let mut ibp_cases: Vec<(Polytope2, AffineFn2, f64, Poly2)> = Vec::new();
    for d in [simplex.clone(), delta_p(0.5)?, random_trapezoid(rng)] {
        let f = random_positive(rng, &d);
        let lin = Poly2::from_affine(&random_affine(rng));
        let mut q = *lin.coeffs();
        for c in &mut q[3..] {
            *c = rng.gen_range(-1.0..1.0);
        }
        ibp_cases.push((d.clone(), f, 4.0, lin));
        ibp_cases.push((d, f, 5.0, Poly2::from_coeffs(q)));
    }
    let ibp = ibp_cases
        .par_iter()
        .map(|(d, f, n, phi)| {
            let r = integration_by_parts(d, f, *n, phi, 1e-10, 1e-3)?;
            Ok((r.residual().abs() / r.scale(), 1e-4))
        })
        .collect::<CliResult<Vec<_>>>()?;

    Ok(vec![
        item("simplex_abreu_curvature", "|s_J − 12| and |H − H_closed| on the unit simplex", &simplex_err),
        item("divergence_reduction_k_minus_2", "pointwise reduction residual, relative", &reduction),
        item("product_rule_expansion", "product rule vs grouped expansion, random α, relative", &expansion),
        negative_control(&control),
        item("integration_by_parts", "|LHS − RHS| / scale, affine and quadratic φ", &ibp),
    ])
}

/// The `k = −2` reduction holds at every point, so the control has to show
/// it fails somewhere: the largest residual must clear the threshold, and
/// every point must stay well above roundoff. The defect is proportional to
/// `H(∇f, ∇f)/f²`, so points where the weight varies slowly sit below the
/// threshold.
fn negative_control(residuals: &[f64]) -> SuiteItem {
    let hi = residuals.iter().fold(0.0f64, |m, v| m.max(*v));
    let lo = residuals.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let over = residuals.iter().filter(|v| **v > 1e-3).count();
    SuiteItem {
        name: "negative_control_k_minus_1",
        pass: hi > 1e-3 && lo > 1e-10,
        detail: format!(
            "reduction residual at (k, n) = (−1, 4), relative: {} points, largest {hi:.3e} (required > 1e-3), \
             smallest {lo:.3e} (required > 1e-10), {over} above 1e-3",
            residuals.len()
        ),
    }
}

// ---- slice ----

fn slice(rng: &mut ChaCha8Rng) -> CliResult<Vec<SuiteItem>> {
    let square = Polytope2::from_vertices(&[
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ])?;
    let polys = [delta_p(0.1)?, delta_p(0.5)?, delta_p(0.95)?, square];
    let config = SearchConfig::default();
    let mut cd = Vec::new();
    let mut stationary = Vec::new();
    let mut empty = 0;
    for d in &polys {
        let rays = find_critical_rays(d, 4.0, &config)?;
        if rays.is_empty() {
            empty += 1;
        }
        for r in &rays {
            cd.push((r.cd_gap / r.d_const.abs(), 1e-6));
            let rep = verify_slice_principle(d, 4.0, &r.f, 1e-5)?;
            stationary.push((rep.slice_residual, 1e-5));
        }
    }
    let mut fut = Vec::new();
    let mut sl = Vec::new();
    for _ in 0..50 {
        let d = random_trapezoid(rng);
        let f = random_positive(rng, &d);
        let rep = verify_slice_principle(&d, 4.0, &f, 1e-3)?;
        fut.push(rep.futaki_residual);
        sl.push(rep.slice_residual);
    }
    let mut cd_item = item("critical_c_equals_d", "|c − d| / |d| at every critical ray found", &cd);
    if empty > 0 {
        cd_item.pass = false;
        cd_item.detail.push_str(&format!(", {empty} polytopes without rays"));
    }
    Ok(vec![
        cd_item,
        item("critical_slice_stationary", "slice residual at every critical ray found", &stationary),
        above("noncritical_futaki", "Futaki residual at random potentials", &fut, 1e-3),
        above("noncritical_slice", "slice residual at random potentials", &sl, 1e-3),
    ])
}
