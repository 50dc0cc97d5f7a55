//! Donaldson-Futaki scans over simple piecewise-linear test functions.
//!
//! A crease is fixed by a point `u` on one edge and a point `v` on another;
//! `L` is the affine function with unit gradient vanishing on the line `uv`
//! and both `max{L, 0}` and `max{−L, 0}` are tested. In two dimensions
//! positivity of `DF` on every such function with nonempty crease is
//! equivalent to K-polystability, so a scan over all edge pairs followed by
//! local refinement gives numerical evidence either way.
//!
//! Verdicts compare the normalized value `DF / min(N₊, N₋)`, where
//! `N± = 2 ∫_∂Δ f^{1−n} max{±L, 0} dσ`. Raw `DF` goes to zero as the crease
//! degenerates onto an edge or a vertex, so a threshold on it would be
//! meaningless near the boundary of the parameter box; the ratio is
//! invariant under `f ↦ Cf` and under unimodular maps.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::functionals::{DfEvaluator, FunctionalContext, PlConvex};
use crate::geometry::Point2;
use crate::math;
use crate::polytope::{AffineFn2, Polytope2, SplFn, GEOM_TOL};

/// An edge walked from its lexicographically smaller endpoint in lattice
/// steps: `point(t) = start + t·direction`, `t ∈ [0, length]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeParam {
    pub edge: usize,
    pub start: Point2,
    pub direction: [i64; 2],
    pub length: f64,
}

impl EdgeParam {
    fn new(delta: &Polytope2, edge: usize) -> Self {
        let e = &delta.edges()[edge];
        let (a, b) = (delta.vertices()[e.start], delta.vertices()[e.end]);
        let forward = (a.x, a.y) < (b.x, b.y);
        let (start, direction) =
            if forward { (a, e.direction) } else { (b, [-e.direction[0], -e.direction[1]]) };
        Self { edge, start, direction, length: e.lattice_length }
    }

    pub fn point(&self, t: f64) -> Point2 {
        self.start + Point2::new(self.direction[0] as f64, self.direction[1] as f64) * t
    }

    fn key(&self) -> (i64, i64, f64, f64) {
        (self.direction[0].abs(), -self.direction[1], self.start.x, self.start.y)
    }

    fn key_cmp(&self, other: &Self) -> core::cmp::Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
    }
}

/// Creases with `u` on one edge and `v` on another.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CreaseCase {
    /// 1-based case number in enumeration order.
    pub id: usize,
    pub u: EdgeParam,
    pub v: EdgeParam,
}

/// Which side of the crease carries the test function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `max{L, 0}`
    Pos,
    /// `max{−L, 0}`
    Neg,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Pos => "pos",
            Orientation::Neg => "neg",
        }
    }
}

impl CreaseCase {
    pub fn e_range(&self) -> (f64, f64) {
        (0.0, self.u.length)
    }

    pub fn f_range(&self) -> (f64, f64) {
        (0.0, self.v.length)
    }

    pub fn u_point(&self, e: f64) -> Point2 {
        self.u.point(e)
    }

    pub fn v_point(&self, f: f64) -> Point2 {
        self.v.point(f)
    }

    /// Unit-gradient affine function vanishing at `u(e)` and `v(f)`.
    ///
    /// Its positive side is the one holding fewer vertices of `delta`, ties
    /// going to the side that holds vertex 0. When `u` and `v` coincide the
    /// line through them along `v`'s edge is used.
    pub fn crease_function(&self, delta: &Polytope2, e: f64, f: f64) -> AffineFn2 {
        let u = self.u_point(e);
        let v = self.v_point(f);
        let scale = delta.polygon().diameter().max(1.0);
        let mut w = v - u;
        if w.norm() <= GEOM_TOL * scale {
            w = Point2::new(self.v.direction[0] as f64, self.v.direction[1] as f64);
        }
        let nrm = Point2::new(-w.y, w.x) * (1.0 / w.norm());
        let l = AffineFn2::new(nrm.x, nrm.y, -nrm.dot(u));
        let tol = GEOM_TOL * scale;
        let (mut pos, mut neg) = (0usize, 0usize);
        for &p in delta.vertices() {
            let x = l.eval(p);
            if x > tol {
                pos += 1;
            } else if x < -tol {
                neg += 1;
            }
        }
        let flip = match pos.cmp(&neg) {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => l.eval(delta.vertices()[0]) < -tol,
        };
        if flip {
            l.neg()
        } else {
            l
        }
    }

    /// `(max{L, 0}, max{−L, 0})` at parameters `(e, f)`.
    pub fn phi(&self, delta: &Polytope2, e: f64, f: f64) -> (SplFn, SplFn) {
        let l = self.crease_function(delta, e, f);
        (SplFn::new(l, delta), SplFn::new(l.neg(), delta))
    }
}

/// All unordered pairs of distinct edges. Within a pair `u` goes on the edge
/// that sorts first by `(|d₁|, −d₂, start)` of its lattice direction, and pairs
/// are listed in that order too.
pub fn enumerate_crease_cases(delta: &Polytope2) -> Vec<CreaseCase> {
    let mut params: Vec<EdgeParam> = (0..delta.edges().len()).map(|i| EdgeParam::new(delta, i)).collect();
    params.sort_by(|a, b| a.key_cmp(b));
    let mut out = Vec::new();
    for i in 0..params.len() {
        for j in i + 1..params.len() {
            out.push(CreaseCase { id: out.len() + 1, u: params[i], v: params[j] });
        }
    }
    out
}

/// `DF` at one grid node, both orientations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanNode {
    pub e: f64,
    pub f: f64,
    pub df_pos: f64,
    pub df_neg: f64,
    /// `2 ∫_∂Δ f^{1−n} max{±L, 0} dσ` for the two orientations.
    pub norm_pos: f64,
    pub norm_neg: f64,
    /// False when quadrature failed at this node.
    pub valid: bool,
    /// The crease has zero length; values are the affine limit.
    pub degenerate: bool,
}

impl ScanNode {
    fn invalid(e: f64, f: f64) -> Self {
        Self {
            e,
            f,
            df_pos: f64::NAN,
            df_neg: f64::NAN,
            norm_pos: f64::NAN,
            norm_neg: f64::NAN,
            valid: false,
            degenerate: false,
        }
    }

    /// Normalized `DF` of one orientation; `None` at degenerate or invalid nodes.
    pub fn normalized(&self, o: Orientation) -> Option<f64> {
        if !self.valid || self.degenerate {
            return None;
        }
        let den = self.norm_pos.min(self.norm_neg);
        if !(den > 0.0) {
            return None;
        }
        Some(match o {
            Orientation::Pos => self.df_pos / den,
            Orientation::Neg => self.df_neg / den,
        })
    }

    pub fn df(&self, o: Orientation) -> f64 {
        match o {
            Orientation::Pos => self.df_pos,
            Orientation::Neg => self.df_neg,
        }
    }
}

/// Evaluates `DF` for both orientations at `(e, f)`.
///
/// Quadrature failures make the node invalid instead of failing the scan.
pub fn evaluate_node(ev: &DfEvaluator<'_>, case: &CreaseCase, e: f64, f: f64) -> Result<ScanNode> {
    let delta = ev.context().delta();
    let (pos, neg) = case.phi(delta, e, f);
    let degenerate = pos.crease.is_none();
    let parts = ev.df_parts(&PlConvex::Spl(pos)).and_then(|p| Ok((p, ev.df_parts(&PlConvex::Spl(neg))?)));
    match parts {
        Ok((p, q)) => Ok(ScanNode {
            e,
            f,
            df_pos: p.value(),
            df_neg: q.value(),
            norm_pos: p.boundary,
            norm_neg: q.boundary,
            valid: true,
            degenerate,
        }),
        Err(Error::ToleranceFailure { .. }) | Err(Error::NonFinite { .. }) => Ok(ScanNode::invalid(e, f)),
        Err(err) => Err(err),
    }
}

/// Tensor grid of `(e, f)` in e-major order.
pub fn grid_points(case: &CreaseCase, grid: usize) -> Vec<(f64, f64)> {
    let (e0, e1) = case.e_range();
    let (f0, f1) = case.f_range();
    let at = |lo: f64, hi: f64, i: usize| {
        if grid <= 1 {
            lo
        } else if i + 1 == grid {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (grid - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            out.push((at(e0, e1, i), at(f0, f1, j)));
        }
    }
    out
}

/// Smallest value over one table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanMinimum {
    pub value: f64,
    pub e: f64,
    pub f: f64,
    pub orientation: Orientation,
}

/// `DF` on the full tensor grid of one crease case.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub case: CreaseCase,
    pub grid: usize,
    pub quad_tol: f64,
    /// Grid nodes in e-major order.
    pub nodes: Vec<ScanNode>,
    /// Smallest raw `DF` over valid nodes and both orientations.
    pub minimum: Option<ScanMinimum>,
    /// Smallest normalized `DF` over valid nodes with nonempty crease.
    pub normalized_minimum: Option<ScanMinimum>,
}

fn fold_min(acc: &mut Option<ScanMinimum>, value: f64, node: &ScanNode, o: Orientation) {
    if acc.is_none_or(|m| value < m.value) {
        *acc = Some(ScanMinimum { value, e: node.e, f: node.f, orientation: o });
    }
}

impl ScanTable {
    pub fn from_nodes(case: CreaseCase, grid: usize, quad_tol: f64, nodes: Vec<ScanNode>) -> Self {
        let mut minimum = None;
        let mut normalized_minimum = None;
        for node in nodes.iter().filter(|n| n.valid) {
            for o in [Orientation::Pos, Orientation::Neg] {
                fold_min(&mut minimum, node.df(o), node, o);
                if let Some(v) = node.normalized(o) {
                    fold_min(&mut normalized_minimum, v, node, o);
                }
            }
        }
        Self { case, grid, quad_tol, nodes, minimum, normalized_minimum }
    }

    /// Largest `|normalized DF|` in the table.
    pub fn scale(&self) -> f64 {
        let mut s = 0.0f64;
        for node in &self.nodes {
            for o in [Orientation::Pos, Orientation::Neg] {
                if let Some(v) = node.normalized(o) {
                    s = s.max(math::abs(v));
                }
            }
        }
        s
    }

    /// Number of valid nodes whose crease is empty.
    pub fn degenerate_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.valid && n.degenerate).count()
    }

    pub fn invalid_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.valid).count()
    }

    fn node_at(&self, e: f64, f: f64) -> Option<&ScanNode> {
        self.nodes.iter().find(|n| n.e == e && n.f == f)
    }
}

/// Scans one case on a `grid × grid` tensor grid.
pub fn df_scan(ev: &DfEvaluator<'_>, case: &CreaseCase, grid: usize) -> Result<ScanTable> {
    if grid < 2 {
        return Err(Error::Domain(alloc::format!("grid must be at least 2, got {grid}")));
    }
    let mut nodes = Vec::with_capacity(grid * grid);
    for (e, f) in grid_points(case, grid) {
        nodes.push(evaluate_node(ev, case, e, f)?);
    }
    Ok(ScanTable::from_nodes(*case, grid, ev.context().tol(), nodes))
}

/// Scan and verdict parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub grid: usize,
    pub quad_tol: f64,
    /// Verdict tolerance relative to the largest `|normalized DF|` seen.
    pub rel_tol: f64,
    /// Budget of `DF` evaluations per Nelder-Mead refinement.
    pub refine_evals: usize,
    /// Relative improvement below which refinement stops restarting.
    pub refine_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { grid: 33, quad_tol: 1e-10, rel_tol: 1e-7, refine_evals: 400, refine_tol: 1e-9 }
    }
}

/// The three possible outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Unstable,
    PolystableEvidence,
    Inconclusive,
}

impl VerdictKind {
    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Unstable => "UNSTABLE",
            VerdictKind::PolystableEvidence => "POLYSTABLE-EVIDENCE",
            VerdictKind::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A locally refined minimum of normalized `DF` for one case and orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinedMinimum {
    pub case_id: usize,
    pub orientation: Orientation,
    pub e: f64,
    pub f: f64,
    /// Normalized `DF`.
    pub value: f64,
    /// Raw `DF`.
    pub df: f64,
    /// Value at the grid node the refinement started from.
    pub grid_value: f64,
}

/// Outcome of a stability check.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// Absolute threshold on normalized `DF`.
    pub tol: f64,
    /// Smallest refined minimum over all cases and orientations.
    pub minimum: Option<RefinedMinimum>,
    /// All refined minima.
    pub refined: Vec<RefinedMinimum>,
    pub text: String,
}

fn normalized_at(ev: &DfEvaluator<'_>, case: &CreaseCase, o: Orientation, e: f64, f: f64) -> Option<(f64, f64)> {
    let node = evaluate_node(ev, case, e, f).ok()?;
    node.normalized(o).map(|v| (v, node.df(o)))
}

/// Nelder-Mead on normalized `DF` inside the case's parameter box, from the
/// table's best node of the given orientation.
///
/// The simplex restarts around the best point with half the previous step
/// until a restart improves the value by less than `value_tol` (relative),
/// the step drops below `1e−9` of the box, or `max_evals` is spent.
pub fn refine_minimum(
    ev: &DfEvaluator<'_>,
    table: &ScanTable,
    orientation: Orientation,
    max_evals: usize,
    value_tol: f64,
) -> Option<RefinedMinimum> {
    let case = table.case;
    let (start, grid_value) = table
        .nodes
        .iter()
        .filter_map(|n| n.normalized(orientation).map(|v| (n, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let (e0, e1) = case.e_range();
    let (f0, f1) = case.f_range();
    let evals = core::cell::Cell::new(0usize);
    let best = core::cell::Cell::new(RefinedMinimum {
        case_id: case.id,
        orientation,
        e: start.e,
        f: start.f,
        value: grid_value,
        df: start.df(orientation),
        grid_value,
    });
    let objective = |p: [f64; 2]| -> f64 {
        evals.set(evals.get() + 1);
        match normalized_at(ev, &case, orientation, p[0], p[1]) {
            Some((v, df)) => {
                if v < best.get().value {
                    best.set(RefinedMinimum { e: p[0], f: p[1], value: v, df, ..best.get() });
                }
                v
            }
            None => f64::INFINITY,
        }
    };
    let spacing = (table.grid.max(2) - 1) as f64;
    let mut steps = [(e1 - e0) / spacing, (f1 - f0) / spacing];
    let min_step = 1e-9 * (e1 - e0).max(f1 - f0);
    while evals.get() < max_evals && steps[0].max(steps[1]) > min_step {
        let before = best.get();
        nelder_mead(&objective, [before.e, before.f], before.value, steps, [(e0, e1), (f0, f1)], || {
            evals.get() < max_evals
        });
        let after = best.get();
        if before.value - after.value <= value_tol * after.value.abs() {
            break;
        }
        steps = [steps[0] / 2.0, steps[1] / 2.0];
    }
    Some(best.get())
}

/// One Nelder-Mead run in a box; points are clamped into the box.
fn nelder_mead(
    objective: &impl Fn([f64; 2]) -> f64,
    x0: [f64; 2],
    f0: f64,
    steps: [f64; 2],
    bounds: [(f64, f64); 2],
    budget_left: impl Fn() -> bool,
) {
    let clamp = |p: [f64; 2]| [p[0].clamp(bounds[0].0, bounds[0].1), p[1].clamp(bounds[1].0, bounds[1].1)];
    let offset = |x: f64, h: f64, (lo, hi): (f64, f64)| if x + h <= hi { x + h } else { (x - h).max(lo) };
    let mut simplex = [x0, [offset(x0[0], steps[0], bounds[0]), x0[1]], [x0[0], offset(x0[1], steps[1], bounds[1])]];
    let mut vals = [f0, objective(simplex[1]), objective(simplex[2])];
    let size_tol = 1e-10 * (bounds[0].1 - bounds[0].0).max(bounds[1].1 - bounds[1].0);
    while budget_left() {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        let spread = (1..3)
            .flat_map(|k| [(simplex[k][0] - simplex[0][0]).abs(), (simplex[k][1] - simplex[0][1]).abs()])
            .fold(0.0f64, f64::max);
        if spread < size_tol || (vals[2] - vals[0]).abs() <= 1e-14 * vals[0].abs() {
            break;
        }
        let c = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |t: f64| clamp([c[0] + t * (simplex[2][0] - c[0]), c[1] + t * (simplex[2][1] - c[1])]);
        let xr = along(-1.0);
        let fr = objective(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = objective(xe);
            (simplex[2], vals[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < vals[1] {
            (simplex[2], vals[2]) = (xr, fr);
        } else {
            let xc = if fr < vals[2] { along(-0.5) } else { along(0.5) };
            let fc = objective(xc);
            if fc < vals[2].min(fr) {
                (simplex[2], vals[2]) = (xc, fc);
            } else {
                for k in 1..3 {
                    simplex[k] = [(simplex[0][0] + simplex[k][0]) / 2.0, (simplex[0][1] + simplex[k][1]) / 2.0];
                    vals[k] = objective(simplex[k]);
                }
            }
        }
    }
}

/// The `(table, orientation)` pairs a verdict refines, in order. Empty when
/// the grid is too coarse to say anything.
pub fn refinement_jobs(tables: &[ScanTable]) -> Vec<(usize, Orientation)> {
    let grid = tables.iter().map(|t| t.grid).min().unwrap_or(0);
    let scale = tables.iter().fold(0.0f64, |s, t| s.max(t.scale()));
    if grid < 3 || !(scale > 0.0) {
        return Vec::new();
    }
    (0..tables.len()).flat_map(|i| [(i, Orientation::Pos), (i, Orientation::Neg)]).collect()
}

/// Turns a set of scans into a verdict, refining every case and orientation.
pub fn verdict_from_tables(ev: &DfEvaluator<'_>, tables: &[ScanTable], config: &ScanConfig) -> Verdict {
    let refined = refinement_jobs(tables)
        .into_iter()
        .filter_map(|(i, o)| refine_minimum(ev, &tables[i], o, config.refine_evals, config.refine_tol))
        .collect();
    assemble_verdict(tables, refined, config)
}

/// Verdict from scans and the refined minima of [`refinement_jobs`].
pub fn assemble_verdict(tables: &[ScanTable], refined: Vec<RefinedMinimum>, config: &ScanConfig) -> Verdict {
    let scale = tables.iter().fold(0.0f64, |s, t| s.max(t.scale()));
    let tol = config.rel_tol * scale;
    let grid = tables.iter().map(|t| t.grid).min().unwrap_or(0);
    let minimum = refined.iter().copied().min_by(|a, b| a.value.total_cmp(&b.value));
    let grid_min = tables
        .iter()
        .filter_map(|t| t.normalized_minimum.map(|m| (t, m)))
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value));
    let (kind, text) = if grid < 3 {
        (
            VerdictKind::Inconclusive,
            alloc::format!(
                "a grid of {grid} points per axis only samples creases through vertices; at least 3 are needed"
            ),
        )
    } else if scale == 0.0 || grid_min.is_none() {
        (VerdictKind::Inconclusive, "no grid node has a nonempty crease with finite DF".into())
    } else if let Some((t, m)) = grid_min.filter(|(_, m)| m.value < -tol) {
        (
            VerdictKind::Unstable,
            alloc::format!(
                "DF < 0 on a simple piecewise-linear function: case {}, e = {}, f = {}, orientation {}, \
                 normalized DF = {:e} (tolerance {:e})",
                t.case.id,
                m.e,
                m.f,
                m.orientation.name(),
                m.value,
                tol
            ),
        )
    } else if let Some(m) = minimum.filter(|m| m.value < -tol) {
        (
            VerdictKind::Unstable,
            alloc::format!(
                "DF < 0 after local refinement: case {}, e = {}, f = {}, orientation {}, normalized DF = {:e} \
                 (tolerance {:e})",
                m.case_id,
                m.e,
                m.f,
                m.orientation.name(),
                m.value,
                tol
            ),
        )
    } else if minimum.is_some_and(|m| m.value > tol) {
        (
            VerdictKind::PolystableEvidence,
            alloc::format!(
                "DF > 0 on every scanned simple piecewise-linear function with nonempty crease, for all cases \
                 and both orientations, after local refinement (smallest normalized DF {:e}, tolerance {:e}). \
                 This is numerical evidence for strict positivity of DF on simple piecewise-linear functions, \
                 which in dimension two is equivalent to K-polystability; a finite grid does not prove it.",
                minimum.map_or(f64::NAN, |m| m.value),
                tol
            ),
        )
    } else {
        (
            VerdictKind::Inconclusive,
            alloc::format!(
                "the refined minimum of normalized DF, {:e}, lies within the tolerance {:e} of zero",
                minimum.map_or(f64::NAN, |m| m.value),
                tol
            ),
        )
    };
    let witness = match kind {
        VerdictKind::Unstable => grid_min
            .filter(|(_, m)| m.value < -tol)
            .map(|(t, m)| RefinedMinimum {
                case_id: t.case.id,
                orientation: m.orientation,
                e: m.e,
                f: m.f,
                value: m.value,
                df: t.node_at(m.e, m.f).map_or(f64::NAN, |n| n.df(m.orientation)),
                grid_value: m.value,
            })
            .or(minimum),
        _ => minimum,
    };
    Verdict { kind, tol, minimum: witness, refined, text }
}

/// Scans and verdict together.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub tables: Vec<ScanTable>,
    pub verdict: Verdict,
}

/// Scans every crease case and returns the verdict.
pub fn stability_verdict(delta: &Polytope2, f: &AffineFn2, n: f64, config: &ScanConfig) -> Result<StabilityReport> {
    let ctx = FunctionalContext::new(delta, *f, n, config.quad_tol)?;
    let ev = DfEvaluator::new(ctx)?;
    let mut tables = Vec::new();
    for case in enumerate_crease_cases(delta) {
        tables.push(df_scan(&ev, &case, config.grid)?);
    }
    let verdict = verdict_from_tables(&ev, &tables, config);
    Ok(StabilityReport { tables, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critical::{closed_form_family, FamilyBranch};
    use crate::polytope::delta_p;

    fn simplex() -> Polytope2 {
        Polytope2::from_vertices(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn delta_p_has_six_cases_left_right_first() {
        let p = 0.1;
        let d = delta_p(p).unwrap();
        let cases = enumerate_crease_cases(&d);
        assert_eq!(cases.len(), 6);
        let c1 = cases[0];
        // left edge then right edge
        assert_eq!((c1.u.edge, c1.v.edge), (3, 1));
        assert_eq!(c1.e_range(), (0.0, 1.0));
        assert!((c1.f_range().1 - 0.9).abs() < 1e-15);
        assert_eq!(c1.u_point(0.3), Point2::new(0.0, 0.3));
        assert_eq!(c1.v_point(0.2), Point2::new(p, 0.2));
        let pairs: Vec<(usize, usize)> = cases.iter().map(|c| (c.u.edge, c.v.edge)).collect();
        assert_eq!(pairs, [(3, 1), (3, 0), (3, 2), (1, 0), (1, 2), (0, 2)]);
        assert_eq!(enumerate_crease_cases(&simplex()).len(), 3);
    }

    #[test]
    fn left_right_crease_matches_closed_form_orientation() {
        // (f − e)μ1 − pμ2 + pe, normalized
        let p = 0.1;
        let d = delta_p(p).unwrap();
        let c1 = enumerate_crease_cases(&d)[0];
        for (e, f) in [(0.5, 0.5), (0.9, 0.1), (0.2, 0.7)] {
            let l = c1.crease_function(&d, e, f);
            let want = AffineFn2::new(f - e, -p, p * e);
            let s = 1.0 / want.gradient().norm();
            assert!((l.a - want.a * s).abs() < 1e-14);
            assert!((l.b - want.b * s).abs() < 1e-14);
            assert!((l.c - want.c * s).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_is_e_major_and_hits_range_ends() {
        let d = delta_p(0.3).unwrap();
        let c = enumerate_crease_cases(&d)[0];
        let g = grid_points(&c, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], (0.0, 0.0));
        assert_eq!(g[1].0, 0.0);
        assert_eq!(g[8], (1.0, 0.7));
    }

    #[test]
    fn orientations_differ_by_futaki_and_degenerate_nodes_are_affine() {
        let d = delta_p(0.3).unwrap();
        let ctx = FunctionalContext::new(&d, AffineFn2::new(0.4, 0.2, 0.5), 4.0, 1e-10).unwrap();
        let ev = DfEvaluator::new(ctx).unwrap();
        let scale = ev.moments().d_const().abs() * ev.moments().vol();
        for case in enumerate_crease_cases(&d) {
            let t = df_scan(&ev, &case, 5).unwrap();
            for node in &t.nodes {
                assert!(node.valid);
                let l = case.crease_function(&d, node.e, node.f);
                assert!((node.df_pos - node.df_neg - ev.futaki(&l)).abs() < 1e-8 * scale);
                if node.degenerate {
                    let (pos, _) = case.phi(&d, node.e, node.f);
                    let a = pos.affine_part(&d).unwrap();
                    assert!((node.df_pos - ev.futaki(&a)).abs() < 1e-12 * scale);
                }
            }
        }
        // u = (0, 0), v = (p, 0): the crease would be the bottom edge
        let t = df_scan(&ev, &enumerate_crease_cases(&d)[0], 5).unwrap();
        assert!(t.nodes[0].degenerate && !t.nodes[12].degenerate);
    }

    #[test]
    fn corner_only_grid_is_inconclusive() {
        let d = delta_p(0.1).unwrap();
        let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
        let r = stability_verdict(&d, &f, 4.0, &ScanConfig { grid: 2, ..ScanConfig::default() }).unwrap();
        assert_eq!(r.verdict.kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn constant_potential_is_not_polystable_on_delta_p() {
        let d = delta_p(0.1).unwrap();
        let r =
            stability_verdict(&d, &AffineFn2::constant(1.0), 4.0, &ScanConfig { grid: 9, ..ScanConfig::default() })
                .unwrap();
        assert_eq!(r.verdict.kind, VerdictKind::Unstable);
        assert!(r.verdict.minimum.unwrap().value < 0.0);
    }

    #[test]
    fn critical_potential_gives_evidence_on_coarse_grid() {
        let d = delta_p(0.1).unwrap();
        let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
        let r = stability_verdict(&d, &f, 4.0, &ScanConfig { grid: 9, ..ScanConfig::default() }).unwrap();
        assert_eq!(r.verdict.kind, VerdictKind::PolystableEvidence, "{}", r.verdict.text);
        for t in &r.tables {
            for node in t.nodes.iter().filter(|n| n.valid && !n.degenerate) {
                assert!(node.df_pos > 0.0 && node.df_neg > 0.0);
            }
        }
    }

    #[test]
    fn verdict_is_scale_invariant() {
        let d = delta_p(0.1).unwrap();
        let f = closed_form_family(0.1, FamilyBranch::CMinus).unwrap();
        let cfg = ScanConfig { grid: 5, ..ScanConfig::default() };
        let base = stability_verdict(&d, &f, 4.0, &cfg).unwrap();
        for c in [0.5, 2.0] {
            let r = stability_verdict(&d, &f.scale(c), 4.0, &cfg).unwrap();
            assert_eq!(r.verdict.kind, base.verdict.kind);
            let (a, b) = (r.tables[0].normalized_minimum.unwrap(), base.tables[0].normalized_minimum.unwrap());
            assert!((a.value - b.value).abs() < 1e-6 * b.value.abs(), "{a:?} {b:?}");
        }
    }

    #[test]
    fn table_minimum_is_row_minimum() {
        let d = delta_p(0.4).unwrap();
        let ctx = FunctionalContext::new(&d, AffineFn2::new(0.1, 0.3, 0.7), 4.0, 1e-10).unwrap();
        let ev = DfEvaluator::new(ctx).unwrap();
        let case = enumerate_crease_cases(&d)[2];
        let t = df_scan(&ev, &case, 6).unwrap();
        let m = t.minimum.unwrap();
        let nm = t.normalized_minimum.unwrap();
        for n in &t.nodes {
            for o in [Orientation::Pos, Orientation::Neg] {
                assert!(n.df(o) >= m.value);
                if let Some(v) = n.normalized(o) {
                    assert!(v >= nm.value);
                }
            }
        }
        assert!(t.nodes.iter().any(|n| n.e == m.e && n.f == m.f && n.df(m.orientation) == m.value));
        assert!(df_scan(&ev, &case, 1).is_err());
    }
}
