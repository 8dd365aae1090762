//! Minimum-norm kernel interpolation and ridge regression in RKHSs given by
//! their Mercer spectra, with tools to measure the variance of the
//! interpolant in power-space norms.
//!
//! - [`spectra`]: power-law eigenvalue sequences, effective dimension,
//!   embedding norms and predicted error exponents.
//! - [`kernels`]: cosine and Fourier spectral kernels, the untruncated cosine
//!   kernel in closed form, and dot-product kernels on spheres.
//! - [`operators`]: the empirical covariance operator and the variance `V(lambda)`.
//! - [`solvers`]: ridge and interpolation fits and their γ-norm errors.
//! - [`harness`]: reproducible Monte Carlo experiments and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod kernels;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod solvers;
pub mod special;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
pub use kernels::{Kernel, PowerKernel};
pub use spectra::Spectrum;
