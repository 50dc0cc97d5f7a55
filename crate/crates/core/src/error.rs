use alloc::string::String;
use core::fmt;

use crate::quadrature::QuadResult;

/// Errors raised by the numerical core.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Input vertices do not describe a strictly convex counterclockwise polygon
    /// with rational edge directions.
    InvalidPolytope(String),
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// The Killing potential is not strictly positive on the polytope.
    NotPositive,
    /// Adaptive quadrature stopped before reaching the requested tolerance.
    ToleranceFailure { best: QuadResult },
    /// A supplied integrand produced a non-finite value.
    NonFinite { x: f64, y: f64 },
    /// The request is outside what this crate implements.
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPolytope(msg) => write!(f, "invalid polytope: {msg}"),
            Error::Domain(msg) => write!(f, "{msg}"),
            Error::NotPositive => write!(f, "affine function is not strictly positive on the polytope"),
            Error::ToleranceFailure { best } => write!(
                f,
                "quadrature did not converge: best estimate {:e} with error {:e} after {} subdivisions",
                best.value, best.error_estimate, best.subdivisions
            ),
            Error::NonFinite { x, y } => write!(f, "integrand is not finite at ({x}, {y})"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
