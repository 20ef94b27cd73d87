//! Numerical library for the crossover distributions of the KPZ equation with
//! half-Brownian (two-sided Bernoulli) initial data.
//!
//! The exact one-point distributions are μ-averaged Fredholm determinants of
//! contour-integral kernels. This crate provides the special functions the
//! kernels are built from, the contours and quadrature grids they live on,
//! Nyström evaluation of the determinants, the distribution-level drivers, and
//! a weakly-asymmetric exclusion-process simulator for Monte Carlo validation.

pub mod asep;
pub mod contours;
pub mod distributions;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod specialfn;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
