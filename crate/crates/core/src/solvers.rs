//! Kernel ridge regression, minimum-norm interpolation and γ-norm errors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernels::spectral::SpectralKernel;
use crate::kernels::{Kernel, PowerKernel};
use crate::linalg::{top_eigenvalue, Factorization, SpdFactor};
use crate::operators::{gamma_norm_sq, TruncatedOperatorModel};

/// Relative jitters tried in order when interpolating, as multiples of the
/// largest Gram eigenvalue.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<P> {
    pub x: Vec<P>,
    pub y: Vec<f64>,
}

impl<P> SampleSet<P> {
    pub fn new(x: Vec<P>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid(format!("{} inputs but {} responses", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(invalid("sample set is empty"));
        }
        Ok(SampleSet { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

/// Solve metadata, separated from the kernel borrow so it can be serialised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitInfo {
    pub lambda_used: f64,
    pub jitter_used: f64,
    pub condition: f64,
    pub factorization: Factorization,
}

/// `f(x) = sum_j alpha_j K(x, x_j)`.
#[derive(Debug, Clone)]
pub struct DualSolution<'k, K: Kernel> {
    kernel: &'k K,
    points: Vec<K::Point>,
    alpha: DVector<f64>,
    info: FitInfo,
}

impl<'k, K: Kernel> DualSolution<'k, K> {
    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn points(&self) -> &[K::Point] {
        &self.points
    }

    pub fn kernel(&self) -> &'k K {
        self.kernel
    }

    pub fn info(&self) -> FitInfo {
        self.info
    }

    pub fn lambda_used(&self) -> f64 {
        self.info.lambda_used
    }

    pub fn jitter_used(&self) -> f64 {
        self.info.jitter_used
    }

    /// An interpolant that needed jitter no longer interpolates exactly.
    pub fn is_jittered_interpolant(&self) -> bool {
        self.info.lambda_used == 0.0 && self.info.jitter_used > 0.0
    }

    pub fn predict(&self, x: &K::Point) -> Result<f64> {
        self.kernel.check_point(x)?;
        Ok(self.kernel.cross(x, &self.points).dot(&self.alpha))
    }

    /// `||f||_H^2 = alpha^T K(X,X) alpha`.
    pub fn rkhs_norm_sq(&self) -> f64 {
        let g = self.kernel.gram(&self.points);
        self.alpha.dot(&(g * &self.alpha))
    }
}

fn check_samples<K: Kernel>(k: &K, s: &SampleSet<K::Point>) -> Result<()> {
    for x in &s.x {
        k.check_point(x)?;
    }
    if s.y.iter().any(|y| !y.is_finite()) {
        return Err(invalid("responses must be finite"));
    }
    Ok(())
}

fn solve_shifted<'k, K: Kernel>(
    k: &'k K,
    s: &SampleSet<K::Point>,
    gram: &DMatrix<f64>,
    lambda: f64,
    jitter: f64,
) -> Result<DualSolution<'k, K>> {
    let n = s.n();
    let mut a = gram.clone();
    let shift = n as f64 * lambda + jitter;
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let factor = SpdFactor::new(&a)?;
    let alpha = factor.solve_vec(&DVector::from_column_slice(&s.y));
    Ok(DualSolution {
        kernel: k,
        points: s.x.clone(),
        alpha,
        info: FitInfo {
            lambda_used: lambda,
            jitter_used: jitter,
            condition: factor.condition(),
            factorization: factor.method(),
        },
    })
}

/// `alpha = (K(X,X) + n lambda + jitter)^-1 Y`; `lambda = jitter = 0` is the
/// minimum-norm interpolant.
pub fn ridge_fit<'k, K: Kernel>(
    k: &'k K,
    s: &SampleSet<K::Point>,
    lambda: f64,
    jitter: f64,
) -> Result<DualSolution<'k, K>> {
    if !(lambda >= 0.0) || !(jitter >= 0.0) {
        return Err(invalid("lambda and jitter must be non-negative"));
    }
    check_samples(k, s)?;
    solve_shifted(k, s, &k.gram(&s.x), lambda, jitter)
}

/// Minimum-norm interpolant, climbing [`JITTER_LADDER`] when `K(X,X)` is numerically singular.
pub fn interpolate<'k, K: Kernel>(k: &'k K, s: &SampleSet<K::Point>) -> Result<DualSolution<'k, K>> {
    check_samples(k, s)?;
    let gram = k.gram(&s.x);
    interpolate_with_gram(k, s, &gram)
}

/// As [`interpolate`] with `K(X,X)` supplied by the caller.
pub fn interpolate_with_gram<'k, K: Kernel>(
    k: &'k K,
    s: &SampleSet<K::Point>,
    gram: &DMatrix<f64>,
) -> Result<DualSolution<'k, K>> {
    let top = top_eigenvalue(gram);
    let mut last = Error::SingularGram { condition: f64::INFINITY };
    for rel in JITTER_LADDER {
        match solve_shifted(k, s, gram, 0.0, rel * top) {
            Ok(sol) => return Ok(sol),
            Err(e @ Error::SingularGram { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// `c_i = mu_i sum_j alpha_j e_i(x_j)`, the `L^2` coefficients of the estimator.
pub fn estimator_l2_coefficients(d: &DualSolution<SpectralKernel>) -> Vec<f64> {
    let k = d.kernel;
    let e = k.basis_matrix(&d.points);
    let ea = e * &d.alpha;
    ea.iter().zip(k.spectrum().mu()).map(|(v, m)| v * m).collect()
}

/// Max difference between the RKHS coefficients `Psi alpha` and
/// `(1/n) sum_i y_i (C_emp + lambda)^-1 psi(x_i)`.
pub fn operator_rep_check(
    d: &DualSolution<SpectralKernel>,
    m: &TruncatedOperatorModel,
    s: &SampleSet<f64>,
    lambda: f64,
) -> Result<f64> {
    if m.n() != s.n() || d.points.len() != s.n() {
        return Err(invalid("model, solution and samples must share the same points"));
    }
    let from_alpha = m.psi() * &d.alpha;
    let w = m.resolvent_features(lambda)?;
    let from_operator = w * DVector::from_column_slice(&s.y) / s.n() as f64;
    Ok((from_alpha - from_operator).amax())
}

/// `sum_i mu_i^-gamma (c_i - b_i)^2` for the estimator coefficients `c` and target `b`.
pub fn gamma_error_sq(d: &DualSolution<SpectralKernel>, f_star_coeffs: &[f64], gamma: f64) -> Result<f64> {
    let spectrum = d.kernel.spectrum();
    if f_star_coeffs.len() > spectrum.len() {
        return Err(invalid("target has more coefficients than the kernel has modes"));
    }
    let target_norm = gamma_norm_sq(f_star_coeffs, spectrum, gamma)?;
    if !target_norm.is_finite() {
        return Err(Error::NotInPowerSpace {
            index: f_star_coeffs.len(),
        });
    }
    let mut diff = estimator_l2_coefficients(d);
    for (c, b) in diff.iter_mut().zip(f_star_coeffs) {
        *c -= b;
    }
    gamma_norm_sq(&diff, spectrum, gamma)
}

/// γ-error through `K^(2-gamma)(X, X)` for kernels without an explicit basis.
///
/// The target is `f* = b1 e_1` with `e_1 = 1` the constant eigenfunction and
/// `mu1` its eigenvalue:
/// `||f - f*||_gamma^2 = alpha^T K^(2-gamma) alpha - 2 b1 mu1^(1-gamma) sum alpha + b1^2 mu1^-gamma`.
pub fn gamma_error_sq_gram<K: PowerKernel>(
    d: &DualSolution<K>,
    gamma: f64,
    b1: f64,
    mu1: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1) (got {gamma})")));
    }
    let p = d.kernel.gram_power(2.0 - gamma, &d.points);
    gamma_error_sq_with_power_gram(&d.alpha, &p, gamma, b1, mu1)
}

/// As [`gamma_error_sq_gram`] with `K^(2-gamma)(X, X)` supplied by the caller.
pub fn gamma_error_sq_with_power_gram(
    alpha: &DVector<f64>,
    power_gram: &DMatrix<f64>,
    gamma: f64,
    b1: f64,
    mu1: f64,
) -> Result<f64> {
    if power_gram.iter().any(|v| !v.is_finite()) {
        return Err(invalid("power kernel is not defined at this gamma"));
    }
    if b1 != 0.0 && !(mu1 > 0.0) {
        return Err(Error::NotInPowerSpace { index: 0 });
    }
    let quad = alpha.dot(&(power_gram * alpha));
    let err = quad - 2.0 * b1 * mu1.powf(1.0 - gamma) * alpha.sum() + b1 * b1 * mu1.powf(-gamma);
    Ok(err.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::exact::ExactCosineKernel;
    use crate::kernels::spectral::Basis;
    use crate::operators::build_operator_model;
    use crate::spectra::{make_power_law_spectrum, Spectrum};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_kernel() -> SpectralKernel {
        SpectralKernel::new(Spectrum::from_eigenvalues(vec![1.0]).unwrap(), Basis::CosineUnitInterval)
    }

    fn cosine(beta: f64, m: usize) -> SpectralKernel {
        SpectralKernel::new(make_power_law_spectrum(beta, 0.0, m).unwrap(), Basis::CosineUnitInterval)
    }

    fn random_set(n: usize, seed: u64) -> SampleSet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..n).map(|_| rng.random()).collect();
        let y = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        SampleSet::new(x, y).unwrap()
    }

    #[test]
    fn scalar_ridge_example() {
        let k = constant_kernel();
        let s = SampleSet::new(vec![0.3], vec![2.0]).unwrap();
        let d = ridge_fit(&k, &s, 0.5, 0.0).unwrap();
        assert_relative_eq!(d.alpha()[0], 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(d.predict(&0.3).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(d.predict(&0.9).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(estimator_l2_coefficients(&d), vec![d.alpha()[0]]);
        let err = gamma_error_sq(&d, &[0.0], 0.5).unwrap();
        assert_relative_eq!(err, 16.0 / 9.0, epsilon = 1e-14);
        assert!(d.predict(&2.0).is_err());
    }

    #[test]
    fn large_lambda_shrinks_alpha() {
        let k = cosine(2.0, 64);
        let s = random_set(8, 1);
        let d = ridge_fit(&k, &s, 1e8, 0.0).unwrap();
        assert!(d.alpha().amax() < 1e-8);
    }

    #[test]
    fn interpolation_reproduces_targets() {
        let k = cosine(2.0, 4096);
        let s = SampleSet::new((0..32).map(|i| (i as f64 + 0.5) / 32.0).collect(), random_set(32, 2).y).unwrap();
        let d = interpolate(&k, &s).unwrap();
        assert_eq!(d.jitter_used(), 0.0);
        let ymax = s.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (x, y) in s.x.iter().zip(&s.y) {
            assert!((d.predict(x).unwrap() - y).abs() <= 1e-6 * ymax);
        }
    }

    #[test]
    fn duplicate_points_need_jitter() {
        let k = cosine(2.0, 64);
        let s = SampleSet::new(vec![0.2, 0.2, 0.7], vec![1.0, -1.0, 0.5]).unwrap();
        assert!(matches!(ridge_fit(&k, &s, 0.0, 0.0), Err(Error::SingularGram { .. })));
        let d = interpolate(&k, &s).unwrap();
        assert!(d.is_jittered_interpolant());
    }

    #[test]
    fn coefficients_reproduce_predictions() {
        let k = cosine(2.0, 512);
        let s = random_set(10, 3);
        let d = ridge_fit(&k, &s, 1e-3, 0.0).unwrap();
        let c = estimator_l2_coefficients(&d);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let x: f64 = rng.random();
            let e = k.basis_values(x);
            let series: f64 = c.iter().zip(&e).map(|(a, b)| a * b).sum();
            assert_relative_eq!(series, d.predict(&x).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn operator_representation_agrees() {
        let k = cosine(2.0, 1024);
        let s = random_set(16, 5);
        let m = build_operator_model(&k, &s.x).unwrap();
        let d = ridge_fit(&k, &s, 1e-3, 0.0).unwrap();
        assert!(operator_rep_check(&d, &m, &s, 1e-3).unwrap() <= 1e-8);
        let zero = SampleSet::new(s.x.clone(), vec![0.0; 16]).unwrap();
        let d0 = ridge_fit(&k, &zero, 1e-3, 0.0).unwrap();
        assert_eq!(operator_rep_check(&d0, &m, &zero, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn gram_error_matches_coefficient_error() {
        let k = cosine(2.0, 256);
        let s = random_set(12, 6);
        let d = ridge_fit(&k, &s, 1e-4, 0.0).unwrap();
        for &gamma in &[0.0, 0.5] {
            let explicit = gamma_error_sq(&d, &[0.7], gamma).unwrap();
            let via_gram = gamma_error_sq_gram(&d, gamma, 0.7, 1.0).unwrap();
            assert_relative_eq!(explicit, via_gram, max_relative = 1e-9);
        }
    }

    #[test]
    fn exact_kernel_interpolates() {
        let k = ExactCosineKernel::new(2.0).unwrap();
        let s = random_set(64, 7);
        let d = interpolate(&k, &s).unwrap();
        let ymax = s.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (x, y) in s.x.iter().zip(&s.y) {
            assert!((d.predict(x).unwrap() - y).abs() <= 1e-6 * ymax);
        }
        assert!(gamma_error_sq_gram(&d, 0.5, 0.0, 1.0).unwrap() > 0.0);
    }
}
