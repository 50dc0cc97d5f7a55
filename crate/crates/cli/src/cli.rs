//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use toric_kstab_core::critical::{
    angular_distance, positive_family_ray, quartic, quartic_alpha, FamilyBranch, SearchConfig,
};
use toric_kstab_core::functionals::FunctionalContext;
use toric_kstab_core::kstability::ScanConfig;
use toric_kstab_core::polytope::delta_p;
use toric_kstab_core::{AffineFn2, Polytope2};

use crate::error::{CliError, CliResult};
use crate::io::{emit_scan_csv, read_polytope, to_json_string, write_json, PolytopeFile, RayJson, ScanReport};
use crate::parallel::{find_critical_rays, stability_report, with_threads};
use crate::suites::{run_suite, Suite, DEFAULT_SEED};

/// Toric K-stability and critical Killing potentials on Delzant polygons
/// (weight k = −2).
#[derive(Debug, Parser)]
#[command(name = "toric-kstab", version)]
pub struct Cli {
    /// Worker threads for scans and searches [default: all cores].
    #[arg(long, global = true, env = "TORIC_KSTAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Work on Δ_p, the quadrilateral (0,0), (p,0), (p,1−p), (0,1).
    DeltaP {
        /// Shape parameter in (0,1).
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[command(subcommand)]
        action: Action,
    },
    /// Work on a polygon read from a JSON file {"vertices": [[x,y], ...]}.
    Polytope {
        #[arg(long)]
        file: PathBuf,
        #[command(subcommand)]
        action: Action,
    },
    /// Run a randomized invariant suite and print one line per check.
    Verify {
        #[arg(long)]
        suite: Suite,
        /// Seed of the random inputs.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print the root in (0,1) of x⁴ − 4x³ + 16x² − 16x + 4.
    Alpha,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    /// Find critical rays of the Einstein-Hilbert functional; prints JSON.
    Critical(CriticalArgs),
    /// Scan DF over every crease case and print a stability verdict.
    DfScan(ScanArgs),
    /// Print the Futaki invariant on 1, μ1, μ2 with c, d and EH; prints JSON.
    Futaki(FutakiArgs),
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    /// Killing potential: "a,b,c" for aμ1 + bμ2 + c, or "search" for the
    /// first critical ray found.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "branch")]
    pub f: Option<String>,
    /// Closed-form critical family on Δ_p: a, b_plus, b_minus, c_plus, c_minus.
    #[arg(long)]
    pub branch: Option<FamilyBranch>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Real dimension n; not 0, 1 or 2.
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub n: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Multistart points on the sphere before the positivity filter.
    #[arg(long, default_value_t = SearchConfig::default().starts)]
    pub starts: usize,
    #[arg(long, default_value_t = SearchConfig::default().max_iterations)]
    pub max_iterations: usize,
    /// Acceptance threshold on the relative gradient norm.
    #[arg(long, default_value_t = SearchConfig::default().convergence_tol)]
    pub tol: f64,
    /// Quadrature tolerance for the search.
    #[arg(long, default_value_t = SearchConfig::default().quad_tol)]
    pub search_quad_tol: f64,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            starts: self.starts,
            max_iterations: self.max_iterations,
            convergence_tol: self.tol,
            quad_tol: self.search_quad_tol,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub n: f64,
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Grid points per parameter axis.
    #[arg(long, default_value_t = ScanConfig::default().grid)]
    pub grid: usize,
    #[arg(long, default_value_t = ScanConfig::default().quad_tol)]
    pub quad_tol: f64,
    /// Verdict tolerance relative to the largest normalized DF.
    #[arg(long, default_value_t = ScanConfig::default().rel_tol)]
    pub rel_tol: f64,
    /// DF evaluations per local refinement.
    #[arg(long, default_value_t = ScanConfig::default().refine_evals)]
    pub refine_evals: usize,
    /// Relative improvement at which refinement stops.
    #[arg(long, default_value_t = ScanConfig::default().refine_tol)]
    pub refine_tol: f64,
    /// Scan CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct FutakiArgs {
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub n: f64,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub quad_tol: f64,
    #[command(flatten)]
    pub search: SearchArgs,
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let threads = cli.threads;
    let result = with_threads(threads, move || {
        let mut buf = Vec::new();
        let r = execute(cli.command, &mut buf);
        (r, buf)
    });
    match result {
        Ok((r, buf)) => {
            let _ = out.write_all(&buf);
            match r {
                Ok(code) => code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

struct Target {
    delta: Polytope2,
    p: Option<f64>,
}

fn execute(command: Command, out: &mut Vec<u8>) -> CliResult<i32> {
    match command {
        Command::Alpha => {
            let a = quartic_alpha();
            writeln!(out, "{a:.15}").ok();
            writeln!(out, "F(alpha) = {:e}", quartic(a)).ok();
            Ok(0)
        }
        Command::Verify { suite, seed } => {
            let items = run_suite(suite, seed)?;
            let passed = items.iter().filter(|i| i.pass).count();
            for i in &items {
                writeln!(out, "{i}").ok();
            }
            writeln!(out, "suite {suite} (seed {seed}): {passed}/{} passed", items.len()).ok();
            Ok(if passed == items.len() { 0 } else { 2 })
        }
        Command::DeltaP { p, action } => act(Target { delta: delta_p(p)?, p: Some(p) }, action, out),
        Command::Polytope { file, action } => act(Target { delta: read_polytope(&file)?, p: None }, action, out),
    }
}

fn act(t: Target, action: Action, out: &mut Vec<u8>) -> CliResult<i32> {
    match action {
        Action::Critical(a) => critical(&t, a, out),
        Action::DfScan(a) => df_scan(&t, a, out),
        Action::Futaki(a) => futaki(&t, a, out),
    }
}

fn family_of(t: &Target, f: &AffineFn2) -> Option<String> {
    let p = t.p?;
    FamilyBranch::ALL.into_iter().find_map(|b| {
        let (ray, _) = positive_family_ray(p, b).ok()?;
        (angular_distance(&ray, f) < 1e-6).then(|| b.name().to_string())
    })
}

#[derive(Serialize)]
struct CriticalJson {
    polytope: PolytopeFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    n: f64,
    rays: Vec<RayJson>,
}

fn critical(t: &Target, a: CriticalArgs, out: &mut Vec<u8>) -> CliResult<i32> {
    let rays = find_critical_rays(&t.delta, a.n, &a.search.config())?;
    let json = CriticalJson {
        polytope: PolytopeFile::from_polytope(&t.delta),
        p: t.p,
        n: a.n,
        rays: rays.iter().map(|r| RayJson::new(r, family_of(t, &r.f))).collect(),
    };
    match &a.out {
        Some(path) => write_json(&json, path)?,
        None => {
            writeln!(out, "{}", to_json_string(&json)).ok();
        }
    }
    Ok(0)
}

fn parse_triple(s: &str) -> CliResult<AffineFn2> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Invalid(format!("--f expects a,b,c or search, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0.0f64; 3];
    for (x, p) in v.iter_mut().zip(&parts) {
        *x = p.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
    }
    Ok(AffineFn2::from_array(v))
}

/// The potential named on the command line, plus a note for standard output.
fn resolve_potential(t: &Target, p: &PotentialArgs, n: f64, search: &SearchArgs) -> CliResult<(AffineFn2, String)> {
    match (&p.f, p.branch) {
        (Some(s), _) if s == "search" => {
            let rays = find_critical_rays(&t.delta, n, &search.config())?;
            let r = rays.first().ok_or_else(|| CliError::Numerical("no critical ray found".into()))?;
            Ok((r.f, "first critical ray found by search".into()))
        }
        (Some(s), _) => Ok((parse_triple(s)?, "explicit".into())),
        (None, Some(b)) => {
            let Some(pv) = t.p else {
                return Err(CliError::Invalid("--branch needs the delta-p polytope".into()));
            };
            let (f, flipped) = positive_family_ray(pv, b)?;
            let note = if flipped {
                format!("family {b}, negated to be positive on the polytope")
            } else {
                format!("family {b}")
            };
            Ok((f, note))
        }
        (None, None) => Err(CliError::Invalid("give the potential with --f or --branch".into())),
    }
}

fn fmt3(v: [f64; 3]) -> String {
    format!("{:.12e},{:.12e},{:.12e}", v[0], v[1], v[2])
}

fn df_scan(t: &Target, a: ScanArgs, out: &mut Vec<u8>) -> CliResult<i32> {
    let (f, note) = resolve_potential(t, &a.potential, a.n, &a.search)?;
    let config = ScanConfig {
        grid: a.grid,
        quad_tol: a.quad_tol,
        rel_tol: a.rel_tol,
        refine_evals: a.refine_evals,
        refine_tol: a.refine_tol,
    };
    let report = stability_report(&t.delta, &f, a.n, &config)?;
    if let Some(path) = &a.out {
        emit_scan_csv(&report.tables, path)?;
    }
    let json = ScanReport::new(&t.delta, &f, a.n, &report);
    if let Some(path) = &a.report {
        write_json(&json, path)?;
    }
    let rows: usize = report.tables.iter().map(|t| t.nodes.len()).sum();
    let v = &report.verdict;
    writeln!(out, "f = {} ({note}), n = {}", fmt3(f.to_array()), a.n).ok();
    writeln!(out, "cases = {}, grid = {}, nodes = {rows}", report.tables.len(), a.grid).ok();
    for c in &json.cases {
        let m = c.minimum.as_ref().map_or(f64::NAN, |m| m.value);
        let nm = c.normalized_minimum.as_ref().map_or(f64::NAN, |m| m.value);
        writeln!(
            out,
            "case {} (edges {}, {}): min DF {m:.6e}, min normalized DF {nm:.6e}, degenerate {}, invalid {}",
            c.id, c.u_edge, c.v_edge, c.degenerate_nodes, c.invalid_nodes
        )
        .ok();
    }
    writeln!(out, "verdict: {}", v.kind).ok();
    writeln!(out, "{}", v.text).ok();
    Ok(0)
}

#[derive(Serialize)]
struct FutakiJson {
    f: [f64; 3],
    n: f64,
    /// Fut(1), Fut(μ1), Fut(μ2)
    futaki: [f64; 3],
    c_const: f64,
    d_const: f64,
    eh: f64,
    vol: f64,
    total_scalar: f64,
}

fn futaki(t: &Target, a: FutakiArgs, out: &mut Vec<u8>) -> CliResult<i32> {
    let (f, _) = resolve_potential(t, &a.potential, a.n, &a.search)?;
    let m = FunctionalContext::new(&t.delta, f, a.n, a.quad_tol)?.moments()?;
    let json = FutakiJson {
        f: f.to_array(),
        n: a.n,
        futaki: m.futaki_basis(),
        c_const: m.c_const(),
        d_const: m.d_const(),
        eh: m.eh(a.n),
        vol: m.vol(),
        total_scalar: m.total_scalar(),
    };
    writeln!(out, "{}", to_json_string(&json)).ok();
    Ok(0)
}
