//! Polytope JSON input, scan CSV and JSON reports.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use toric_kstab_core::critical::CriticalRay;
use toric_kstab_core::kstability::{Orientation, RefinedMinimum, ScanMinimum, ScanTable, StabilityReport};
use toric_kstab_core::{AffineFn2, Point2, Polytope2};

use crate::error::{CliError, CliResult};

/// `{"vertices": [[x, y], ...]}`, counterclockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub vertices: Vec<[f64; 2]>,
}

impl PolytopeFile {
    pub fn from_polytope(delta: &Polytope2) -> Self {
        Self { vertices: delta.vertices().iter().map(|&p| p.into()).collect() }
    }

    pub fn to_polytope(&self) -> CliResult<Polytope2> {
        let pts: Vec<Point2> = self.vertices.iter().map(|&v| v.into()).collect();
        Ok(Polytope2::from_vertices(&pts)?)
    }
}

pub fn parse_polytope(json: &str) -> CliResult<Polytope2> {
    let file: PolytopeFile =
        serde_json::from_str(json).map_err(|e| CliError::Invalid(format!("polytope JSON: {e}")))?;
    file.to_polytope()
}

pub fn read_polytope(path: &Path) -> CliResult<Polytope2> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    parse_polytope(&text).map_err(|e| match e {
        CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub const CSV_HEADER: [&str; 6] = ["case", "e", "f", "df_pos", "df_neg", "valid"];

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes every node of every table, cases in order, nodes e-major.
pub fn write_scan_csv<W: Write>(tables: &[ScanTable], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for t in tables {
        let id = t.case.id.to_string();
        for n in &t.nodes {
            let valid = if n.valid { "1" } else { "0" };
            out.write_record([id.as_str(), &sci(n.e), &sci(n.f), &sci(n.df_pos), &sci(n.df_neg), valid])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn emit_scan_csv(tables: &[ScanTable], path: &Path) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::io(path.display().to_string(), e);
    let file = File::create(path).map_err(io_err)?;
    write_scan_csv(tables, BufWriter::new(file)).map_err(|e| io_err(e.into()))
}

/// One parsed CSV row.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub case: usize,
    pub e: f64,
    pub f: f64,
    pub df_pos: f64,
    pub df_neg: f64,
    pub valid: u8,
}

pub fn read_scan_csv<R: Read>(r: R) -> CliResult<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Invalid(format!("scan CSV: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != CSV_HEADER {
        return Err(CliError::Invalid(format!("scan CSV: unexpected header {header:?}")));
    }
    rdr.deserialize().map(|row| row.map_err(|e| CliError::Invalid(format!("scan CSV: {e}")))).collect()
}

/// Per-case minimum over valid rows, with the same tie rule as [`ScanTable`].
pub fn minima_from_rows(rows: &[CsvRow]) -> BTreeMap<usize, ScanMinimum> {
    let mut out: BTreeMap<usize, ScanMinimum> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.valid == 1) {
        for (o, v) in [(Orientation::Pos, r.df_pos), (Orientation::Neg, r.df_neg)] {
            let better = out.get(&r.case).is_none_or(|m| v < m.value);
            if better {
                out.insert(r.case, ScanMinimum { value: v, e: r.e, f: r.f, orientation: o });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimumJson {
    pub value: f64,
    pub e: f64,
    pub f: f64,
    pub orientation: &'static str,
}

impl From<ScanMinimum> for MinimumJson {
    fn from(m: ScanMinimum) -> Self {
        Self { value: m.value, e: m.e, f: m.f, orientation: m.orientation.name() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinedJson {
    pub case: usize,
    pub orientation: &'static str,
    pub e: f64,
    pub f: f64,
    pub normalized_df: f64,
    pub df: f64,
    pub grid_value: f64,
}

impl From<RefinedMinimum> for RefinedJson {
    fn from(m: RefinedMinimum) -> Self {
        Self {
            case: m.case_id,
            orientation: m.orientation.name(),
            e: m.e,
            f: m.f,
            normalized_df: m.value,
            df: m.df,
            grid_value: m.grid_value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseJson {
    pub id: usize,
    pub u_edge: usize,
    pub v_edge: usize,
    pub e_range: [f64; 2],
    pub f_range: [f64; 2],
    pub grid: usize,
    pub quad_tol: f64,
    pub minimum: Option<MinimumJson>,
    pub normalized_minimum: Option<MinimumJson>,
    /// Valid nodes whose crease is empty; their values are affine limits.
    pub degenerate_nodes: usize,
    pub invalid_nodes: usize,
}

impl From<&ScanTable> for CaseJson {
    fn from(t: &ScanTable) -> Self {
        let (e0, e1) = t.case.e_range();
        let (f0, f1) = t.case.f_range();
        Self {
            id: t.case.id,
            u_edge: t.case.u.edge,
            v_edge: t.case.v.edge,
            e_range: [e0, e1],
            f_range: [f0, f1],
            grid: t.grid,
            quad_tol: t.quad_tol,
            minimum: t.minimum.map(Into::into),
            normalized_minimum: t.normalized_minimum.map(Into::into),
            degenerate_nodes: t.degenerate_count(),
            invalid_nodes: t.invalid_count(),
        }
    }
}

/// The scan report written by `df-scan`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub polytope: PolytopeFile,
    pub f: [f64; 3],
    pub n: f64,
    pub verdict: &'static str,
    pub verdict_text: String,
    pub tol: f64,
    pub minimum: Option<RefinedJson>,
    pub refined: Vec<RefinedJson>,
    pub cases: Vec<CaseJson>,
}

impl ScanReport {
    pub fn new(delta: &Polytope2, f: &AffineFn2, n: f64, report: &StabilityReport) -> Self {
        let v = &report.verdict;
        Self {
            polytope: PolytopeFile::from_polytope(delta),
            f: f.to_array(),
            n,
            verdict: v.kind.name(),
            verdict_text: v.text.clone(),
            tol: v.tol,
            minimum: v.minimum.map(Into::into),
            refined: v.refined.iter().copied().map(Into::into).collect(),
            cases: report.tables.iter().map(Into::into).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayJson {
    pub f: [f64; 3],
    pub eh: f64,
    pub grad_norm: f64,
    pub futaki_residuals: [f64; 3],
    pub futaki_scale: f64,
    pub c_const: f64,
    pub d_const: f64,
    pub cd_gap: f64,
    pub eigenvalues: [f64; 2],
    pub classification: &'static str,
    /// Closed-form family the ray matches, on `Δ_p` only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl RayJson {
    pub fn new(r: &CriticalRay, family: Option<String>) -> Self {
        Self {
            f: r.f.to_array(),
            eh: r.eh,
            grad_norm: r.grad_norm,
            futaki_residuals: r.futaki_residuals,
            futaki_scale: r.futaki_scale,
            c_const: r.c_const,
            d_const: r.d_const,
            cd_gap: r.cd_gap,
            eigenvalues: r.eigenvalues,
            classification: r.classification.name(),
            family,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::io(path.display().to_string(), e);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err)
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}
