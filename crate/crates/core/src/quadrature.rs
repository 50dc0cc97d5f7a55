//! Adaptive quadrature over convex polygons and their lattice boundaries.
//!
//! Interior integrals fan-triangulate the polygon from its centroid and apply a
//! collapsed (conical product) Gauss-Legendre rule on each triangle. Cells are
//! refined by longest-edge bisection, worst error first; the error of a cell is
//! the difference between the rule on the cell and the sum of the rule on its
//! two children. Boundary integrals use the same scheme on edge intervals with
//! a 1-D Gauss-Legendre rule, weighted by lattice length.
//!
//! Refinement order depends only on the input, never on `tol`, and totals are
//! summed with compensation in cell order, so results are reproducible.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::math::{self, KahanSum};
use crate::polytope::{clip_half_plane, is_positive_on, AffineFn2, Polygon, Polytope2, SplFn};

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Maximum bisection depth of a single cell.
pub const MAX_DEPTH: u32 = 30;
/// Hard cap on the number of live cells in one integral.
pub const MAX_CELLS: usize = 200_000;

const TRIANGLE_ORDER: usize = 8;
const LINE_ORDER: usize = 10;

/// Value of one integral with its absolute error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// Several integrals over the same cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecQuad<const N: usize> {
    pub values: [f64; N],
    pub errors: [f64; N],
    pub subdivisions: usize,
}

impl<const N: usize> VecQuad<N> {
    pub fn zero() -> Self {
        Self { values: [0.0; N], errors: [0.0; N], subdivisions: 0 }
    }

    pub fn component(&self, k: usize) -> QuadResult {
        QuadResult { value: self.values[k], error_estimate: self.errors[k], subdivisions: self.subdivisions }
    }
}

/// A polynomial in `(μ1, μ2)` of total degree at most 2.
///
/// Coefficients are ordered `1, μ1, μ2, μ1², μ1μ2, μ2²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly2 {
    coeffs: [f64; 6],
}

impl Poly2 {
    /// `coeffs` must hold exactly 1, 3 or 6 entries for degree 0, 1 or 2.
    pub fn new(degree: usize, coeffs: &[f64]) -> Result<Self> {
        let expected = match degree {
            0 => 1,
            1 => 3,
            2 => 6,
            _ => return Err(Error::Domain(alloc::format!("polynomial degree {degree} exceeds 2"))),
        };
        if coeffs.len() != expected {
            return Err(Error::Domain(alloc::format!(
                "degree {degree} polynomial needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        let mut c = [0.0; 6];
        c[..expected].copy_from_slice(coeffs);
        Ok(Self { coeffs: c })
    }

    pub const fn constant(c: f64) -> Self {
        Self { coeffs: [c, 0.0, 0.0, 0.0, 0.0, 0.0] }
    }

    pub const fn from_coeffs(coeffs: [f64; 6]) -> Self {
        Self { coeffs }
    }

    pub fn from_affine(f: &AffineFn2) -> Self {
        Self { coeffs: [f.c, f.a, f.b, 0.0, 0.0, 0.0] }
    }

    pub fn coeffs(&self) -> &[f64; 6] {
        &self.coeffs
    }

    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        let c = &self.coeffs;
        c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.x * p.x + c[4] * p.x * p.y + c[5] * p.y * p.y
    }

    pub fn gradient(&self, p: Point2) -> [f64; 2] {
        let c = &self.coeffs;
        [c[1] + 2.0 * c[3] * p.x + c[4] * p.y, c[2] + c[4] * p.x + 2.0 * c[5] * p.y]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let c = &self.coeffs;
        [[2.0 * c[3], c[4]], [c[4], 2.0 * c[5]]]
    }
}

/// Weight multiplying `f^α` in an integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Polynomial(Poly2),
    Spl(SplFn),
}

impl Weight {
    pub fn one() -> Self {
        Weight::Polynomial(Poly2::constant(1.0))
    }

    pub fn affine(f: &AffineFn2) -> Self {
        Weight::Polynomial(Poly2::from_affine(f))
    }
}

/// Gauss-Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub(crate) struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub(crate) fn new(m: usize) -> Self {
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let mf = m as f64;
        for i in 0..m {
            let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = mf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if math::abs(dx) < 1e-16 {
                    break;
                }
            }
            nodes.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapKey {
    priority: f64,
    seq: usize,
}

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Cell<R, const N: usize> {
    kids: [R; 2],
    kid_values: [[f64; N]; 2],
    value: [f64; N],
    err: [f64; N],
    depth: u32,
}

fn converged<const N: usize>(val: &[f64; N], err: &[f64; N], tol: f64) -> bool {
    (0..N).all(|k| err[k] <= tol * math::abs(val[k]).max(1.0))
}

fn make_cell<R, const N: usize>(
    region: &R,
    coarse: [f64; N],
    depth: u32,
    split: &impl Fn(&R) -> [R; 2],
    rule: &mut impl FnMut(&R) -> Result<[f64; N]>,
) -> Result<Cell<R, N>> {
    let kids = split(region);
    let k0 = rule(&kids[0])?;
    let k1 = rule(&kids[1])?;
    let mut value = [0.0; N];
    let mut err = [0.0; N];
    for k in 0..N {
        value[k] = k0[k] + k1[k];
        err[k] = math::abs(coarse[k] - value[k]);
    }
    Ok(Cell { kids, kid_values: [k0, k1], value, err, depth })
}

fn exact_totals<R, const N: usize>(cells: &[Option<Cell<R, N>>]) -> ([f64; N], [f64; N]) {
    let mut val = [KahanSum::default(); N];
    let mut err = [KahanSum::default(); N];
    for cell in cells.iter().flatten() {
        for k in 0..N {
            val[k].add(cell.value[k]);
            err[k].add(cell.err[k]);
        }
    }
    (val.map(|s| s.value()), err.map(|s| s.value()))
}

/// Generic worst-first adaptive integration over regions of type `R`.
fn adaptive<R: Copy, const N: usize>(
    initial: &[R],
    split: impl Fn(&R) -> [R; 2],
    mut rule: impl FnMut(&R) -> Result<[f64; N]>,
    tol: f64,
) -> Result<VecQuad<N>> {
    if !(tol > 0.0) {
        return Err(Error::Domain(alloc::format!("tolerance must be positive, got {tol}")));
    }
    let mut cells: Vec<Option<Cell<R, N>>> = Vec::with_capacity(initial.len() * 4);
    for region in initial {
        let coarse = rule(region)?;
        cells.push(Some(make_cell(region, coarse, 0, &split, &mut rule)?));
    }
    let (mut val, mut err) = exact_totals(&cells);
    let scale: [f64; N] = val.map(|v| math::abs(v).max(1.0));
    let priority = |c: &Cell<R, N>| (0..N).map(|k| c.err[k] / scale[k]).fold(0.0, f64::max);
    let mut heap: BinaryHeap<HeapKey> = cells
        .iter()
        .enumerate()
        .map(|(seq, c)| HeapKey { priority: priority(c.as_ref().unwrap()), seq })
        .collect();
    let mut live = cells.len();
    let mut subdivisions = 0usize;
    loop {
        if converged(&val, &err, tol) {
            let (v, e) = exact_totals(&cells);
            val = v;
            err = e;
            if converged(&val, &err, tol) {
                break;
            }
        }
        let top = heap.pop().expect("adaptive heap never empties");
        let cell = cells[top.seq].take().expect("heap refers to live cell");
        if cell.depth >= MAX_DEPTH || live >= MAX_CELLS {
            cells[top.seq] = Some(cell);
            let (v, e) = exact_totals(&cells);
            let worst = (0..N)
                .max_by(|&a, &b| (e[a] / scale[a]).total_cmp(&(e[b] / scale[b])))
                .unwrap_or(0);
            return Err(Error::ToleranceFailure {
                best: QuadResult { value: v[worst], error_estimate: e[worst], subdivisions },
            });
        }
        for k in 0..N {
            val[k] -= cell.value[k];
            err[k] -= cell.err[k];
        }
        for i in 0..2 {
            let child = make_cell(&cell.kids[i], cell.kid_values[i], cell.depth + 1, &split, &mut rule)?;
            for k in 0..N {
                val[k] += child.value[k];
                err[k] += child.err[k];
            }
            heap.push(HeapKey { priority: priority(&child), seq: cells.len() });
            cells.push(Some(child));
        }
        live += 1;
        subdivisions += 1;
    }
    Ok(VecQuad { values: val, errors: err, subdivisions })
}

type Triangle = [Point2; 3];

fn bisect_triangle(t: &Triangle) -> [Triangle; 2] {
    let [a, b, c] = *t;
    let lab = (b - a).norm();
    let lbc = (c - b).norm();
    let lca = (a - c).norm();
    if lab >= lbc && lab >= lca {
        let m = a.lerp(b, 0.5);
        [[c, a, m], [c, m, b]]
    } else if lbc >= lca {
        let m = b.lerp(c, 0.5);
        [[a, b, m], [a, m, c]]
    } else {
        let m = c.lerp(a, 0.5);
        [[b, c, m], [b, m, a]]
    }
}

fn checked<const N: usize>(v: [f64; N], p: Point2) -> Result<[f64; N]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite { x: p.x, y: p.y })
    }
}

fn triangle_rule<const N: usize>(
    t: &Triangle,
    g: &GaussRule,
    f: &mut impl FnMut(Point2) -> [f64; N],
) -> Result<[f64; N]> {
    let [a, b, c] = *t;
    let ab = b - a;
    let bc = c - b;
    let jac = math::abs(ab.cross(bc));
    let mut acc = [0.0; N];
    for (s, ws) in g.nodes.iter().zip(&g.weights) {
        let mut inner = [0.0; N];
        for (tt, wt) in g.nodes.iter().zip(&g.weights) {
            let p = a + ab * *s + bc * (*s * *tt);
            let v = checked(f(p), p)?;
            for k in 0..N {
                inner[k] += wt * v[k];
            }
        }
        let w = ws * s * jac;
        for k in 0..N {
            acc[k] += w * inner[k];
        }
    }
    Ok(acc)
}

/// `∫_poly F dμ` for a vector-valued integrand, adaptive to `tol` relative
/// (absolute below magnitude 1) in every component.
pub fn integrate_polygon<const N: usize>(
    poly: &Polygon,
    mut f: impl FnMut(Point2) -> [f64; N],
    tol: f64,
) -> Result<VecQuad<N>> {
    let verts = poly.vertices();
    if verts.len() < 3 {
        return Ok(VecQuad::zero());
    }
    let c = poly.centroid();
    let n = verts.len();
    let fan: Vec<Triangle> = (0..n).map(|i| [c, verts[i], verts[(i + 1) % n]]).collect();
    let g = GaussRule::new(TRIANGLE_ORDER);
    adaptive(&fan, bisect_triangle, |t: &Triangle| triangle_rule(t, &g, &mut f), tol)
}

/// `∫_0^1 F(a + t(b − a)) dt`, adaptive.
pub fn integrate_segment<const N: usize>(
    a: Point2,
    b: Point2,
    mut f: impl FnMut(Point2) -> [f64; N],
    tol: f64,
) -> Result<VecQuad<N>> {
    let g = GaussRule::new(LINE_ORDER);
    let rule = |iv: &[f64; 2]| -> Result<[f64; N]> {
        let h = iv[1] - iv[0];
        let mut acc = [0.0; N];
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            let p = a.lerp(b, iv[0] + h * x);
            let v = checked(f(p), p)?;
            for k in 0..N {
                acc[k] += w * h * v[k];
            }
        }
        Ok(acc)
    };
    let split = |iv: &[f64; 2]| {
        let m = 0.5 * (iv[0] + iv[1]);
        [[iv[0], m], [m, iv[1]]]
    };
    adaptive(&[[0.0, 1.0]], split, rule, tol)
}

/// `∫_∂Δ F dσ` in lattice measure, restricted to `{clip ≥ 0}` when a clip
/// function is given. Each edge is integrated to `tol / edge_count`.
pub fn integrate_lattice_boundary<const N: usize>(
    delta: &Polytope2,
    clip: Option<&AffineFn2>,
    mut f: impl FnMut(Point2) -> [f64; N],
    tol: f64,
) -> Result<VecQuad<N>> {
    let edge_tol = tol / delta.edges().len() as f64;
    let mut total = VecQuad::zero();
    let mut sums = [KahanSum::default(); N];
    for (i, e) in delta.edges().iter().enumerate() {
        let seg = delta.edge_segment(i);
        let (mut a, mut b) = (seg.start, seg.end);
        let mut frac = 1.0;
        if let Some(l) = clip {
            let (la, lb) = (l.eval(a), l.eval(b));
            if la <= 0.0 && lb <= 0.0 {
                continue;
            }
            if la < 0.0 || lb < 0.0 {
                let t = la / (la - lb);
                let m = a.lerp(b, t);
                if la < 0.0 {
                    a = m;
                    frac = 1.0 - t;
                } else {
                    b = m;
                    frac = t;
                }
            }
        }
        let measure = e.lattice_length * frac;
        if measure <= 0.0 {
            continue;
        }
        let q = integrate_segment(a, b, &mut f, edge_tol)?;
        for k in 0..N {
            sums[k].add(measure * q.values[k]);
            total.errors[k] += measure * q.errors[k];
        }
        total.subdivisions += q.subdivisions;
    }
    total.values = sums.map(|s| s.value());
    Ok(total)
}

fn require_positive(f: &AffineFn2, poly: &impl AsRef<Polygon>) -> Result<()> {
    if is_positive_on(f, poly) {
        Ok(())
    } else {
        Err(Error::NotPositive)
    }
}

/// `∫_Δ w · f^α dμ` for `f` strictly positive on `Δ`.
///
/// A simple piecewise-linear weight is handled by integrating its linear part
/// over the piece `{L ≥ 0}`, so every cell sees a smooth integrand.
pub fn integrate_interior(
    delta: &impl AsRef<Polygon>,
    w: &Weight,
    f: &AffineFn2,
    alpha: f64,
    tol: f64,
) -> Result<QuadResult> {
    require_positive(f, delta)?;
    let poly = delta.as_ref();
    let q = match w {
        Weight::Polynomial(p) => integrate_polygon(poly, |m| [p.eval(m) * math::pow(f.eval(m), alpha)], tol)?,
        Weight::Spl(s) => match clip_half_plane(poly, &s.linear) {
            Some(piece) => {
                let l = s.linear;
                integrate_polygon(&piece, |m| [l.eval(m) * math::pow(f.eval(m), alpha)], tol)?
            }
            None => {
                if !(tol > 0.0) {
                    return Err(Error::Domain(alloc::format!("tolerance must be positive, got {tol}")));
                }
                VecQuad::zero()
            }
        },
    };
    Ok(q.component(0))
}

/// `∫_∂Δ w · f^α dσ` with the lattice boundary measure.
pub fn integrate_boundary(delta: &Polytope2, w: &Weight, f: &AffineFn2, alpha: f64, tol: f64) -> Result<QuadResult> {
    require_positive(f, delta)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(alloc::format!("tolerance must be positive, got {tol}")));
    }
    let q = match w {
        Weight::Polynomial(p) => {
            integrate_lattice_boundary(delta, None, |m| [p.eval(m) * math::pow(f.eval(m), alpha)], tol)?
        }
        Weight::Spl(s) => {
            let l = s.linear;
            integrate_lattice_boundary(delta, Some(&l), |m| [l.eval(m).max(0.0) * math::pow(f.eval(m), alpha)], tol)?
        }
    };
    Ok(q.component(0))
}

/// Integral of a pointwise field over a polygon shrunk toward its centroid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldIntegral {
    /// Integral over the polygon shrunk by `margin`.
    pub at_margin: QuadResult,
    /// Richardson extrapolation to zero margin from margins `4h, 2h, h`.
    pub extrapolated: f64,
}

/// Integrates `field` over `delta` shrunk by the homothety factor
/// `1 − margin` about its centroid, plus a zero-margin extrapolation.
///
/// Margins `h, 2h, 4h` are used for the extrapolation, which cancels the
/// linear and quadratic terms in `h`; `margin` must lie in `[0, 1/4)`.
pub fn integrate_field(
    delta: &impl AsRef<Polygon>,
    field: impl Fn(Point2) -> f64,
    tol: f64,
    margin: f64,
) -> Result<FieldIntegral> {
    if !(0.0..0.25).contains(&margin) {
        return Err(Error::Domain(alloc::format!("margin must be in [0, 0.25), got {margin}")));
    }
    let poly = delta.as_ref();
    let at = |m: f64| -> Result<QuadResult> {
        let shrunk = poly.shrunk(m);
        Ok(integrate_polygon(&shrunk, |p| [field(p)], tol)?.component(0))
    };
    let i1 = at(margin)?;
    if margin == 0.0 {
        return Ok(FieldIntegral { at_margin: i1, extrapolated: i1.value });
    }
    let i2 = at(2.0 * margin)?;
    let i4 = at(4.0 * margin)?;
    let extrapolated = (8.0 * i1.value - 6.0 * i2.value + i4.value) / 3.0;
    Ok(FieldIntegral { at_margin: i1, extrapolated })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{delta_p, split_along};
    use proptest::prelude::*;

    fn simplex() -> Polytope2 {
        Polytope2::from_vertices(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]).unwrap()
    }

    fn square() -> Polytope2 {
        Polytope2::from_vertices(&[
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gauss_rule_integrates_high_degree() {
        let g = GaussRule::new(8);
        let s: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn simplex_area_with_constant_f() {
        let q = integrate_interior(&simplex(), &Weight::one(), &AffineFn2::constant(1.0), -4.0, DEFAULT_TOL).unwrap();
        assert!((q.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simplex_interior_power_oracle() {
        // ∫_0^1 s (1+s)^-4 ds
        let f = AffineFn2::new(1.0, 1.0, 1.0);
        let q = integrate_interior(&simplex(), &Weight::one(), &f, -4.0, DEFAULT_TOL).unwrap();
        assert!(rel(q.value, 1.0 / 12.0) < 1e-10, "{}", q.value);
        assert!(q.error_estimate <= DEFAULT_TOL);
    }

    #[test]
    fn simplex_boundary_power_oracle() {
        // legs: ∫_0^1 (1+t)^-3 = 3/8 each; hypotenuse f = 2 gives 1/8
        let f = AffineFn2::new(1.0, 1.0, 1.0);
        let q = integrate_boundary(&simplex(), &Weight::one(), &f, -3.0, DEFAULT_TOL).unwrap();
        assert!(rel(q.value, 0.875) < 1e-10, "{}", q.value);
    }

    #[test]
    fn boundary_of_delta_p_is_lattice_perimeter() {
        let d = delta_p(0.1).unwrap();
        let q = integrate_boundary(&d, &Weight::one(), &AffineFn2::constant(1.0), 2.7, DEFAULT_TOL).unwrap();
        assert!((q.value - 2.1).abs() < 1e-13);
    }

    #[test]
    fn spl_weight_on_square() {
        let w = Weight::Spl(SplFn::new(AffineFn2::new(1.0, 0.0, -0.5), &square()));
        let q = integrate_interior(&square(), &w, &AffineFn2::constant(1.0), 0.0, DEFAULT_TOL).unwrap();
        assert!((q.value - 0.125).abs() < 1e-14);
    }

    #[test]
    fn boundary_linear_weight_on_square() {
        let w = Weight::affine(&AffineFn2::coordinate(0));
        let q = integrate_boundary(&square(), &w, &AffineFn2::constant(1.0), 0.0, DEFAULT_TOL).unwrap();
        assert!((q.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spl_boundary_weight_is_clipped() {
        // max{μ1 − 0.5, 0} on the square boundary: two half edges give 1/8 each, right edge 1/2
        let w = Weight::Spl(SplFn::new(AffineFn2::new(1.0, 0.0, -0.5), &square()));
        let q = integrate_boundary(&square(), &w, &AffineFn2::constant(1.0), 0.0, DEFAULT_TOL).unwrap();
        assert!((q.value - 0.75).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive_f() {
        let f = AffineFn2::new(1.0, 0.0, 0.0);
        assert_eq!(
            integrate_interior(&simplex(), &Weight::one(), &f, -4.0, DEFAULT_TOL),
            Err(Error::NotPositive)
        );
    }

    #[test]
    fn field_examples() {
        let s = simplex();
        let one = integrate_field(&s, |_| 1.0, DEFAULT_TOL, 0.0).unwrap();
        assert!((one.extrapolated - 0.5).abs() < 1e-14);
        let x = integrate_field(&s, |p| p.x, DEFAULT_TOL, 0.0).unwrap();
        assert!((x.extrapolated - 1.0 / 6.0).abs() < 1e-14);
        let shrunk = integrate_field(&s, |_| 1.0, DEFAULT_TOL, 1e-3).unwrap();
        assert!((shrunk.extrapolated - 0.5).abs() < 1e-12);
        assert!(integrate_field(&s, |_| 1.0, DEFAULT_TOL, 0.3).is_err());
    }

    #[test]
    fn non_finite_field_reports_location() {
        let err = integrate_field(&simplex(), |p| if p.x > 0.5 { f64::NAN } else { 1.0 }, 1e-8, 0.0).unwrap_err();
        assert!(matches!(err, Error::NonFinite { x, .. } if x > 0.5));
    }

    #[test]
    fn exhausting_cells_is_a_tolerance_failure() {
        let err = integrate_field(&simplex(), |p| 1.0 / (p.x - 0.3).abs().sqrt(), 1e-15, 0.0).unwrap_err();
        match err {
            Error::ToleranceFailure { best } => assert!(best.value.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quadratic_moments_are_exact() {
        // ∫ over the unit square of 1 + 2x − y + x² + 3xy − y²
        let p = Poly2::from_coeffs([1.0, 2.0, -1.0, 1.0, 3.0, -1.0]);
        let exact = 1.0 + 1.0 - 0.5 + 1.0 / 3.0 + 0.75 - 1.0 / 3.0;
        let q = integrate_interior(&square(), &Weight::Polynomial(p), &AffineFn2::constant(1.0), 0.0, DEFAULT_TOL)
            .unwrap();
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn poly_degree_checks() {
        assert!(Poly2::new(1, &[1.0, 2.0]).is_err());
        assert!(Poly2::new(3, &[0.0; 10]).is_err());
        assert!(Poly2::new(2, &[0.0; 6]).is_ok());
    }

    #[test]
    fn tighter_tolerance_weakly_reduces_error() {
        let d = delta_p(0.1).unwrap();
        let f = AffineFn2::new(-3.20878, -3.19756, 3.38878);
        let mut last = f64::INFINITY;
        for tol in [1e-4, 1e-6, 1e-8, 1e-10, 1e-12] {
            let q = integrate_interior(&d, &Weight::one(), &f, -5.0, tol).unwrap();
            assert!(q.error_estimate <= last);
            last = q.error_estimate;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn additivity_over_creases(a in -1.0f64..1.0, b in -1.0f64..1.0, x in 0.05f64..0.95) {
            prop_assume!(a.abs() + b.abs() > 0.1);
            let d = delta_p(0.3).unwrap();
            let c = -(a * x * 0.3 + b * (1.0 - x) * 0.5);
            let l = AffineFn2::new(a, b, c);
            let f = AffineFn2::new(0.4, -0.3, 1.0);
            let whole = integrate_interior(&d, &Weight::one(), &f, -3.0, 1e-11).unwrap().value;
            let (pos, neg) = split_along(&d, &l);
            let mut parts = 0.0;
            for piece in [pos, neg].into_iter().flatten() {
                parts += integrate_interior(&piece, &Weight::one(), &f, -3.0, 1e-11).unwrap().value;
            }
            prop_assert!((whole - parts).abs() < 1e-9 * whole);
        }

        #[test]
        fn power_scaling(c in 0.1f64..10.0, alpha in -5.0f64..2.0) {
            let d = delta_p(0.6).unwrap();
            let f = AffineFn2::new(0.5, 0.2, 0.7);
            let base = integrate_interior(&d, &Weight::one(), &f, alpha, 1e-11).unwrap().value;
            let scaled = integrate_interior(&d, &Weight::one(), &f.scale(c), alpha, 1e-11).unwrap().value;
            prop_assert!(rel(scaled, c.powf(alpha) * base) < 1e-9);
        }
    }
}
