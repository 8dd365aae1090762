//! Kernels with known Mercer decompositions.
//!
//! - [`spectral::SpectralKernel`]: an explicit `L^2`-orthonormal basis on `[0, 1]`
//!   (cosine) or the circle (Fourier) weighted by a truncated [`Spectrum`].
//! - [`exact::ExactCosineKernel`]: the untruncated cosine kernel with
//!   `mu_i = i^-beta`, summed in closed form.
//! - [`dot_product`]: dot-product kernels on spheres through Gegenbauer
//!   polynomials, including the shallow ReLU NTK.
//!
//! [`Spectrum`]: crate::spectra::Spectrum

pub mod dot_product;
pub mod exact;
pub mod spectral;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// A positive semi-definite kernel on some point type.
pub trait Kernel: Send + Sync {
    type Point: Clone + Send + Sync + std::fmt::Debug;

    fn check_point(&self, x: &Self::Point) -> Result<()>;

    /// Kernel value without domain checks.
    fn eval_unchecked(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// `K(X, X)`.
    fn gram(&self, xs: &[Self::Point]) -> DMatrix<f64> {
        symmetric_fill(xs.len(), |i, j| self.eval_unchecked(&xs[i], &xs[j]))
    }

    /// `K(x, X)`.
    fn cross(&self, x: &Self::Point, xs: &[Self::Point]) -> DVector<f64> {
        DVector::from_iterator(xs.len(), xs.iter().map(|xj| self.eval_unchecked(x, xj)))
    }
}

/// Kernels whose Mercer eigenvalues can be raised to a power,
/// `K^(s)(x, y) = sum_i mu_i^s e_i(x) e_i(y)`.
pub trait PowerKernel: Kernel {
    fn eval_power_unchecked(&self, s: f64, x: &Self::Point, y: &Self::Point) -> f64;

    fn gram_power(&self, s: f64, xs: &[Self::Point]) -> DMatrix<f64> {
        symmetric_fill(xs.len(), |i, j| self.eval_power_unchecked(s, &xs[i], &xs[j]))
    }
}

/// `K(x, y)` with domain checks on both points.
pub fn kernel_eval<K: Kernel>(k: &K, x: &K::Point, y: &K::Point) -> Result<f64> {
    k.check_point(x)?;
    k.check_point(y)?;
    Ok(k.eval_unchecked(x, y))
}

pub(crate) fn symmetric_fill(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = f(i, j);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}
