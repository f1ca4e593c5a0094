//! Invariant random-matrix ensembles and their derivative principles.
//!
//! This crate implements, on six matrix spaces (Hermitian, antisymmetric
//! even/odd, anti-self-dual, complex rectangular, positive definite and
//! unitary), the machinery relating joint eigenvalue or singular-value
//! densities to densities of simpler matrix statistics: diagonal entries,
//! pseudo-diagonal entries, or LU diagonals.
//!
//! The main layers are:
//! * [`ensemble`] — matrix spaces, samplers, spectral extraction, Weyl densities
//! * [`weights`] — symbolic weight-function algebra closed under the
//!   Vandermonde differential operators
//! * [`transforms`] — multivariate Fourier, Hankel, Mellin, Fourier-series
//!   and inverse Abel transforms
//! * [`spherical`] — HCIZ-type group integrals and the four spherical
//!   transforms with regularized inverses
//! * [`principles`] — the derivative principles and convolution corollaries
//! * [`haar`] — an iterative parametrization of U(n) with closed-form LU
//!   diagonals and an exact Haar sampler
//! * [`verify`] — statistical comparison harness (KS, L1, chi-square)

pub mod ensemble;
pub mod error;
pub mod grid;
pub mod haar;
pub mod principles;
pub mod quad;
pub mod special;
pub mod spherical;
pub mod transforms;
pub mod verify;
pub mod weights;

pub use error::{Result, RmtError};
