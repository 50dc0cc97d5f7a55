//! Numerics for toric K-stability of constant weighted scalar curvature
//! (conformally Kähler, Einstein-Maxwell type) metrics on Delzant polygons.
//!
//! Everything here is `no_std` with `alloc`: the crate does geometry,
//! quadrature and root finding only. File formats, the command line and
//! parallel scanning live in the `toric-kstab` companion crate.
//!
//! Module map:
//!
//! * [`polytope`]: Delzant polygons with lattice data, affine and simple
//!   piecewise-linear functions, crease geometry.
//! * [`quadrature`]: adaptive interior and lattice-boundary integrals.
//! * [`functionals`]: volume, total scalar curvature, the constants `c` and
//!   `d`, the Futaki and Donaldson-Futaki invariants and the normalized
//!   Einstein-Hilbert functional, all for `k = -2`.
//! * [`abreu`]: closed-form calculus of the canonical symplectic potential.
//! * [`critical`]: critical rays of the Einstein-Hilbert functional.
//! * [`kstability`]: crease scans and stability verdicts.

#![cfg_attr(not(test), no_std)]
// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::should_implement_trait)]

extern crate alloc;

pub mod abreu;
pub mod critical;
mod error;
pub mod functionals;
mod geometry;
pub mod kstability;
mod linalg;
mod math;
pub mod polytope;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{Point2, Segment};
pub use polytope::{AffineFn2, IntMatrix2, Polygon, Polytope2, SplFn};
pub use quadrature::{QuadResult, Weight};
