//! Command line, file formats and parallel drivers for `toric-kstab-core`.
//!
//! * [`io`]: polytope JSON, scan CSV, JSON reports.
//! * [`parallel`]: rayon scans and searches with deterministic output.
//! * [`suites`]: the randomized checks behind `verify`.
//! * [`cli`]: argument parsing and exit codes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod suites;

pub use cli::{run, run_with};
pub use error::{CliError, CliResult};
