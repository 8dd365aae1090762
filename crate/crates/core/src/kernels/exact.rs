//! The cosine kernel on `[0, 1]` with the untruncated spectrum `mu_i = i^-beta`.
//!
//! With `e_1 = 1` and `e_i = sqrt(2) cos((i-1) pi x)`,
//!
//! ```text
//! K(x, y) = 1 + F(pi (x - y)) + F(pi (x + y)),
//! F(t)    = sum_{k >= 1} (k+1)^-beta cos(k t) = Re[e^{-it} Li_beta(e^{it})] - 1,
//! ```
//!
//! so every entry is a pair of polylogarithm evaluations on the unit circle.
//! Truncating this series at `M` terms turns the kernel into a band-limited
//! trigonometric polynomial, which interpolates badly once sample spacings
//! drop below `1/M`; the closed form has no such floor.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{symmetric_fill, Kernel, PowerKernel};
use crate::error::{invalid, Error, Result};
use crate::special::UnitCirclePolylog;
use crate::spectra::{make_power_law_spectrum, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct ExactCosineKernel {
    beta: f64,
    series: UnitCirclePolylog,
}

impl ExactCosineKernel {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(invalid(format!("beta must exceed 1 (got {beta})")));
        }
        Ok(ExactCosineKernel {
            beta,
            series: UnitCirclePolylog::new(beta),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The first `m` eigenvalues, identical to `make_power_law_spectrum(beta, 0, m)`.
    pub fn spectrum(&self, m: usize) -> Result<Spectrum> {
        make_power_law_spectrum(self.beta, 0.0, m)
    }

    /// `K^(s)` as a kernel in its own right; needs `beta * s > 1`.
    pub fn power(&self, s: f64) -> Result<ExactCosineKernel> {
        ExactCosineKernel::new(self.beta * s)
    }
}

fn eval_with(series: &UnitCirclePolylog, x: f64, y: f64) -> f64 {
    1.0 + shifted_cosine_series(series, PI * (x - y)) + shifted_cosine_series(series, PI * (x + y))
}

/// `sum_{k >= 1} (k+1)^-p cos(k t)` for the order `p` of `series`.
pub fn shifted_cosine_series(series: &UnitCirclePolylog, t: f64) -> f64 {
    let (c, s) = series.eval(t);
    t.cos() * c + t.sin() * s - 1.0
}

impl Kernel for ExactCosineKernel {
    type Point = f64;

    fn check_point(&self, x: &f64) -> Result<()> {
        if (0.0..=1.0).contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                point: format!("{x}"),
                domain: "[0, 1]",
            })
        }
    }

    fn eval_unchecked(&self, x: &f64, y: &f64) -> f64 {
        eval_with(&self.series, *x, *y)
    }
}

impl PowerKernel for ExactCosineKernel {
    /// Needs `beta * s > 1`; returns NaN otherwise.
    fn eval_power_unchecked(&self, s: f64, x: &f64, y: &f64) -> f64 {
        if !(self.beta * s > 1.0) {
            return f64::NAN;
        }
        eval_with(&UnitCirclePolylog::new(self.beta * s), *x, *y)
    }

    fn gram_power(&self, s: f64, xs: &[f64]) -> DMatrix<f64> {
        if !(self.beta * s > 1.0) {
            return DMatrix::from_element(xs.len(), xs.len(), f64::NAN);
        }
        let series = UnitCirclePolylog::new(self.beta * s);
        symmetric_fill(xs.len(), |i, j| eval_with(&series, xs[i], xs[j]))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::kernels::spectral::{Basis, SpectralKernel};
    use approx::assert_relative_eq;

    // reference values: mpmath lerchphi at 30 digits
    const REFERENCE: &[(f64, f64, f64, f64)] = &[
        (2.0, 0.3, 0.7, 0.791_340_214_987_413_5),
        (2.0, 0.0, 0.0, 2.289_868_133_696_452_9),
        (2.0, 0.9, 0.95, 1.688_272_388_907_289_1),
        (2.0, 0.5, 0.500_000_1, 1.467_400_606_793_643),
        (3.0, 0.1, 0.1, 1.297_752_543_992_991_8),
        (3.0, 0.5, 0.500_000_1, 1.103_599_580_528_582_6),
        (2.5, 0.3, 0.7, 0.858_707_313_170_414_2),
        (2.5, 1.0, 1.0, 1.682_974_514_501_834_4),
        (1.5, 0.1, 0.1, 2.780_793_811_673_860_2),
        (1.5, 0.9, 0.95, 2.005_066_980_772_556_8),
        (4.0, 0.9, 0.95, 1.140_910_503_378_710_9),
        (3.0005, 0.3, 0.7, 0.903_736_247_284_402_6),
        (2.9995, 0.1, 0.1, 1.297_879_638_422_942_9),
    ];

    #[test]
    fn matches_reference_values() {
        for &(p, x, y, want) in REFERENCE {
            let got = eval_with(&UnitCirclePolylog::new(p), x, y);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn diagonal_at_zero_is_twice_zeta_minus_one() {
        let k = ExactCosineKernel::new(2.0).unwrap();
        let want = 1.0 + 2.0 * (PI * PI / 6.0 - 1.0);
        assert_relative_eq!(k.eval_unchecked(&0.0, &0.0), want, max_relative = 1e-14);
    }

    #[test]
    fn agrees_with_long_truncation_at_separated_points() {
        let k = ExactCosineKernel::new(3.0).unwrap();
        let trunc = SpectralKernel::new(k.spectrum(20_000).unwrap(), Basis::CosineUnitInterval);
        for &(x, y) in &[(0.2, 0.6), (0.05, 0.9), (0.33, 0.34)] {
            // tail beyond 20000 terms is below 2 sum_{i > M} i^-3 ~ 2.5e-9
            assert_relative_eq!(k.eval_unchecked(&x, &y), trunc.eval_unchecked(&x, &y), epsilon = 5e-9);
        }
    }

    #[test]
    fn near_duplicate_differences_are_resolved() {
        // the beta = 2 kernel has a cusp with slope pi/2 in t = pi (x - y),
        // so K(x,x) - K(x,x+d) ~ pi^2 d / 2
        let k = ExactCosineKernel::new(2.0).unwrap();
        let x = 0.5;
        let d = 1e-7;
        let diff = k.eval_unchecked(&x, &x) - k.eval_unchecked(&x, &(x + d));
        assert_relative_eq!(diff / (PI * PI * d / 2.0), 1.0, max_relative = 1e-3);
        assert!(k.eval_power_unchecked(0.5, &0.0, &0.1).is_nan());
    }
}
