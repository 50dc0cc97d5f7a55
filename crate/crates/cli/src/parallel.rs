//! Rayon versions of the scans and the multistart search. Results are
//! collected in input order, so output does not depend on the thread count.

use rayon::prelude::*;
use toric_kstab_core::critical::{check_config, merge_rays, refine_start, search_starts, CriticalRay, SearchConfig};
use toric_kstab_core::functionals::{DfEvaluator, FunctionalContext};
use toric_kstab_core::kstability::{
    assemble_verdict, enumerate_crease_cases, evaluate_node, grid_points, refine_minimum, refinement_jobs,
    CreaseCase, ScanConfig, ScanTable, StabilityReport,
};
use toric_kstab_core::{AffineFn2, Polytope2};

use crate::error::{CliError, CliResult};

/// Runs `f` on a pool with `threads` workers, or rayon's default when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Scans every case on a `grid × grid` tensor grid.
pub fn scan_cases(ev: &DfEvaluator<'_>, cases: &[CreaseCase], grid: usize) -> CliResult<Vec<ScanTable>> {
    if grid < 2 {
        return Err(CliError::Invalid(format!("grid must be at least 2, got {grid}")));
    }
    let jobs: Vec<(usize, f64, f64)> = cases
        .iter()
        .enumerate()
        .flat_map(|(i, c)| grid_points(c, grid).into_iter().map(move |(e, f)| (i, e, f)))
        .collect();
    let mut nodes = jobs
        .par_iter()
        .map(|&(i, e, f)| evaluate_node(ev, &cases[i], e, f))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter();
    let quad_tol = ev.context().tol();
    Ok(cases
        .iter()
        .map(|c| ScanTable::from_nodes(*c, grid, quad_tol, nodes.by_ref().take(grid * grid).collect()))
        .collect())
}

/// Full scan of all crease cases plus the refined verdict.
pub fn stability_report(delta: &Polytope2, f: &AffineFn2, n: f64, config: &ScanConfig) -> CliResult<StabilityReport> {
    let ctx = FunctionalContext::new(delta, *f, n, config.quad_tol)?;
    let ev = DfEvaluator::new(ctx)?;
    let tables = scan_cases(&ev, &enumerate_crease_cases(delta), config.grid)?;
    let refined = refinement_jobs(&tables)
        .par_iter()
        .filter_map(|&(i, o)| refine_minimum(&ev, &tables[i], o, config.refine_evals, config.refine_tol))
        .collect();
    let verdict = assemble_verdict(&tables, refined, config);
    Ok(StabilityReport { tables, verdict })
}

/// Multistart critical ray search, starts refined in parallel.
pub fn find_critical_rays(delta: &Polytope2, n: f64, config: &SearchConfig) -> CliResult<Vec<CriticalRay>> {
    check_config(n, config)?;
    let found = search_starts(delta, config)
        .par_iter()
        .map(|s| refine_start(delta, n, s, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_rays(found.into_iter().flatten()))
}
