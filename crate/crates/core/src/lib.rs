//! Numerical and symbolic laboratory for Gaussian decay, logarithmic convexity and
//! Carleman-type estimates of Schrödinger evolutions.
//!
//! Layout:
//! - [`grid`]: periodic 1-D grid, spectral calculus, weights and overflow-safe weighted norms.
//! - [`propagators`]: free / complex-time / heat / Airy flows, Strang splitting and closed-form oracles.
//! - [`gaussian_means`]: Gaussian-mean traces, convexity and interpolation checks, the
//!   misleading-convexity ODE and its counterexample.
//! - [`appel`]: the conformal (Appel) transform and its identities.
//! - [`weyl`]: exact noncommutative differential-operator calculus.
//! - [`carleman`]: Carleman inequality benches, annulus scans and Hardy-threshold scans.
//! - [`lab`]: configuration, run records, the suite and the command-line front end.

// `!(x > y)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod appel;
pub mod carleman;
pub mod error;
pub mod gaussian_means;
pub mod grid;
pub mod lab;
pub mod numerics;
pub mod propagators;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64;
