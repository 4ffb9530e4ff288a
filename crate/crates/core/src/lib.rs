//! Covariance-optimal (Karhunen-Loève) basis sets built from hydrogen-like
//! radial wavefunctions, and a spectral collocation solver for the
//! regularized radial Schrödinger equation that uses them.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! 1. [`hydrogenic`]: radial wavefunctions and reference solutions.
//! 2. [`sampling`]: grids and the sample matrix.
//! 3. [`klcore`]: centering, covariance, symmetric eigensolver, truncation.
//! 4. [`basisfn`]: barycentric interpolation of eigenvectors with derivatives.
//! 5. [`spectral`]: collocation assembly, solve, residuals and energy scans.

pub mod basisfn;
pub mod csv;
pub mod error;
pub mod hydrogenic;
pub mod klcore;
pub mod quadrature;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
