use thiserror::Error;

/// Errors raised by the basis construction and collocation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid orbital (n={n}, l={l}, Z={z}): {reason}")]
    InvalidOrbital { n: u32, l: u32, z: f64, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x = {x} lies outside the domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("under-determined system: {rows} equations for {unknowns} unknowns")]
    Underdetermined { rows: usize, unknowns: usize },

    #[error("numerically singular system (smallest pivot {pivot:e}, matrix norm {norm:e})")]
    Singular { pivot: f64, norm: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
