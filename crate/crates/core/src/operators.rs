//! Covariance operators in truncated coefficient space and the variance
//! functionals `V`, `V_1`, `V_2`.
//!
//! Coefficients are taken in the RKHS basis `sqrt(mu_i) e_i`, where the
//! canonical feature map is `psi_i(x) = sqrt(mu_i) e_i(x)`. The empirical
//! operator is `C_emp = (1/n) Psi Psi^T` for the `M x n` feature matrix `Psi`.
//! Rather than forming `C_emp`, the model keeps a thin SVD
//! `Psi / sqrt(n) = U S V^T`, which gives the resolvent on the sample span:
//! `(C_emp + lambda)^-1 psi(x_j) = sqrt(n) U (S / (S^2 + lambda)) V^T e_j`.

use nalgebra::{DMatrix, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::spectral::SpectralKernel;
use crate::kernels::{Kernel, PowerKernel};
use crate::linalg::{trace_of_product, SpdFactor};
use crate::rng::{stream, Purpose};
use crate::spectra::{effective_dimension, embedding_norm, EmbeddingSource, Spectrum};
use crate::stats::median;

/// Singular values of `Psi / sqrt(n)` below this fraction of the largest are
/// treated as zero by the `lambda = 0` pseudo-inverse.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Default number of modes kept in an operator model.
pub const DEFAULT_OPERATOR_TRUNCATION: usize = 4096;

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(invalid(format!("gamma must lie in [0, 1) (got {gamma})")))
    }
}

fn check_lambda(lambda: f64, allow_zero: bool) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() || allow_zero && lambda == 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be {} (got {lambda})", if allow_zero { "non-negative" } else { "positive" })))
    }
}

/// `C_nu = diag(mu)` and `C_emp` for one sample, in coefficient space.
#[derive(Debug, Clone)]
pub struct TruncatedOperatorModel {
    kernel: SpectralKernel,
    points: Vec<f64>,
    psi: DMatrix<f64>,
    u: DMatrix<f64>,
    sing: Vec<f64>,
    v_t: DMatrix<f64>,
}

pub fn build_operator_model(k: &SpectralKernel, xs: &[f64]) -> Result<TruncatedOperatorModel> {
    if xs.is_empty() {
        return Err(invalid("need at least one sample point"));
    }
    for x in xs {
        k.check_point(*x)?;
    }
    let n = xs.len();
    let psi = k.weighted_basis_matrix(xs, 1.0);
    let svd = SVD::new(&psi / (n as f64).sqrt(), true, true);
    let u = svd.u.ok_or_else(|| Error::Degenerate("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Degenerate("SVD did not return V".into()))?;
    Ok(TruncatedOperatorModel {
        kernel: k.clone(),
        points: xs.to_vec(),
        psi,
        u,
        sing: svd.singular_values.iter().copied().collect(),
        v_t,
    })
}

impl TruncatedOperatorModel {
    pub fn kernel(&self) -> &SpectralKernel {
        &self.kernel
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.kernel.spectrum()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.psi.nrows()
    }

    /// `M x n` feature matrix with columns `psi(x_j)`.
    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    /// Singular values of `Psi / sqrt(n)`; their squares are the non-zero eigenvalues of `C_emp`.
    pub fn singular_values(&self) -> &[f64] {
        &self.sing
    }

    /// Dense `M x M` empirical operator. Quadratic in `M`: meant for checks at small truncation.
    pub fn c_emp(&self) -> DMatrix<f64> {
        &self.psi * self.psi.transpose() / self.n() as f64
    }

    /// Numerical rank of `C_emp` under [`RANK_CUTOFF`].
    pub fn rank(&self) -> usize {
        let cut = self.cutoff();
        self.sing.iter().filter(|s| **s > cut).count()
    }

    fn cutoff(&self) -> f64 {
        RANK_CUTOFF * self.sing.iter().cloned().fold(0.0, f64::max)
    }

    /// `|tr(C_emp) - (1/n) sum_k K(x_k, x_k)|` relative to the latter.
    pub fn trace_residual(&self) -> f64 {
        let n = self.n() as f64;
        let direct: f64 = self.points.iter().map(|x| self.kernel.eval_unchecked(x, x)).sum::<f64>() / n;
        let from_features = self.psi.iter().map(|v| v * v).sum::<f64>() / n;
        (from_features - direct).abs() / direct.abs()
    }

    // filter g(s) applied to the singular values, with the factor sqrt(n)
    fn spectral_filter(&self, lambda: f64) -> Result<Vec<f64>> {
        let cut = self.cutoff();
        if lambda == 0.0 && self.rank() < self.n() {
            return Err(Error::SingularOperator {
                rank: self.rank(),
                n: self.n(),
            });
        }
        let root_n = (self.n() as f64).sqrt();
        Ok(self
            .sing
            .iter()
            .map(|&s| if s > cut { root_n * s / (s * s + lambda) } else { 0.0 })
            .collect())
    }

    /// `M x n` matrix with columns `(C_emp + lambda)^-1 psi(x_j)`; at `lambda = 0`
    /// the inverse of `C_emp` restricted to the sample span.
    pub fn resolvent_features(&self, lambda: f64) -> Result<DMatrix<f64>> {
        check_lambda(lambda, true)?;
        let g = self.spectral_filter(lambda)?;
        let mut scaled = self.u.clone();
        for (j, gj) in g.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*gj);
        }
        Ok(scaled * &self.v_t)
    }

    /// `V(lambda)` by explicit `M x M` solves against the dense `C_emp`.
    /// Only for `lambda > 0` and modest `M`.
    pub fn v_lambda_dense(&self, gamma: f64, lambda: f64) -> Result<f64> {
        check_gamma(gamma)?;
        check_lambda(lambda, false)?;
        let mut a = self.c_emp();
        for i in 0..self.m() {
            a[(i, i)] += lambda;
        }
        let w = SpdFactor::new(&a)?.solve(&self.psi);
        Ok(weighted_frobenius(&w, self.spectrum().mu(), 1.0 - gamma) / (self.n() as f64).powi(2))
    }
}

// sum_{l,j} mu_l^p w_{lj}^2
fn weighted_frobenius(w: &DMatrix<f64>, mu: &[f64], p: f64) -> f64 {
    let mut total = 0.0;
    for (l, &m) in mu.iter().enumerate() {
        let row: f64 = w.row(l).iter().map(|v| v * v).sum();
        total += m.powf(p) * row;
    }
    total
}

/// `sum_i mu_i^-gamma c_i^2` for `L^2` coefficients `c`.
pub fn gamma_norm_sq(c: &[f64], s: &Spectrum, gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1] (got {gamma})")));
    }
    if c.len() > s.len() {
        return Err(invalid(format!("{} coefficients for a spectrum of length {}", c.len(), s.len())));
    }
    let mut total = 0.0;
    for (i, (&ci, &mu)) in c.iter().zip(s.mu()).enumerate() {
        if ci == 0.0 {
            continue;
        }
        let w = mu.powf(-gamma);
        if !w.is_finite() {
            return Err(Error::NotInPowerSpace { index: i });
        }
        total += w * ci * ci;
    }
    Ok(total)
}

/// `(1/n^2) sum_i || D^((1-gamma)/2) (C_emp + lambda)^-1 psi(x_i) ||^2`.
///
/// With `Psi / sqrt(n) = U S V^T` this collapses to
/// `(1/n) sum_j q_j s_j^2 / (s_j^2 + lambda)^2` where `q_j = sum_l mu_l^(1-gamma) U_lj^2`.
pub fn v_lambda_coefficient_route(m: &TruncatedOperatorModel, gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_lambda(lambda, true)?;
    let g = m.spectral_filter(lambda)?;
    let mu = m.spectrum().mu();
    let p = 1.0 - gamma;
    let weights: Vec<f64> = mu.iter().map(|x| x.powf(p)).collect();
    let mut total = 0.0;
    for (j, gj) in g.iter().enumerate() {
        if *gj == 0.0 {
            continue;
        }
        let q: f64 = m.u.column(j).iter().zip(&weights).map(|(u, w)| w * u * u).sum();
        total += q * gj * gj;
    }
    // g carries sqrt(n), so total = n * sum_j q_j s_j^2/(s_j^2+l)^2 and V = total / n^2
    Ok(total / (m.n() as f64).powi(2))
}

/// `(1/n^2) tr(A K^(2-gamma)(X,X) A)` with `A = (K(X,X)/n + lambda)^-1`.
pub fn v_lambda_gram_route<K: PowerKernel>(k: &K, xs: &[K::Point], gamma: f64, lambda: f64) -> Result<f64> {
    GramVariance::new(k, xs, gamma)?.v(lambda)
}

/// `K(X,X)` and `K^(2-gamma)(X,X)` kept for evaluating the Gram route along a lambda grid.
#[derive(Debug, Clone)]
pub struct GramVariance {
    gram: DMatrix<f64>,
    power: DMatrix<f64>,
}

impl GramVariance {
    pub fn new<K: PowerKernel>(k: &K, xs: &[K::Point], gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if xs.is_empty() {
            return Err(invalid("need at least one sample point"));
        }
        for x in xs {
            k.check_point(x)?;
        }
        Ok(GramVariance {
            gram: k.gram(xs),
            power: k.gram_power(2.0 - gamma, xs),
        })
    }

    pub fn v(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda, true)?;
        let n = self.gram.nrows() as f64;
        let mut g = &self.gram / n;
        for i in 0..self.gram.nrows() {
            g[(i, i)] += lambda;
        }
        let factor = SpdFactor::new(&g).map_err(|e| match e {
            Error::SingularGram { condition } => Error::IllConditioned { condition },
            other => other,
        })?;
        let a = factor.inverse();
        let am = &a * &self.power;
        Ok(trace_of_product(&am, &a) / (n * n))
    }
}

/// `(1/n^2) sum_i sum_l mu_l^(2-gamma) / (mu_l + lambda)^2 e_l(x_i)^2`.
pub fn v1_lambda(m: &TruncatedOperatorModel, gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_lambda(lambda, false)?;
    // psi_l^2 = mu_l e_l^2
    let w: Vec<f64> = m
        .spectrum()
        .mu()
        .iter()
        .map(|&mu| mu.powf(1.0 - gamma) / (mu + lambda).powi(2))
        .collect();
    let mut total = 0.0;
    for col in m.psi.column_iter() {
        total += col.iter().zip(&w).map(|(p, wl)| wl * p * p).sum::<f64>();
    }
    Ok(total / (m.n() as f64).powi(2))
}

/// `(1/n) sum_i mu_i^(2-gamma) / (mu_i + lambda)^2`.
pub fn v2_lambda(s: &Spectrum, gamma: f64, lambda: f64, n: usize) -> Result<f64> {
    check_gamma(gamma)?;
    check_lambda(lambda, false)?;
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(s.v2_sum(gamma, lambda) / n as f64)
}

/// Constant-free lower rate `(1/n) lambda^(-gamma - 1/beta) (ln 1/lambda)^(-zeta)`;
/// NaN when the spectrum carries no decay parameters.
pub fn v2_rate_envelope(s: &Spectrum, gamma: f64, lambda: f64, n: usize) -> f64 {
    match s.decay() {
        Some(d) => lambda.powf(-gamma - 1.0 / d.beta) * (1.0 / lambda).ln().powf(-d.zeta) / n as f64,
        None => f64::NAN,
    }
}

/// `| ||[f]||_gamma - ||C^((1-gamma)/2) f||_H |` for `f = sum_i w_i sqrt(mu_i) e_i`.
pub fn norm_eq_check(k: &SpectralKernel, f_coeffs_h: &[f64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mu = k.spectrum().mu();
    if f_coeffs_h.len() > mu.len() {
        return Err(invalid("more coefficients than modes"));
    }
    let l2: Vec<f64> = f_coeffs_h.iter().zip(mu).map(|(w, m)| w * m.sqrt()).collect();
    let lhs = gamma_norm_sq(&l2, k.spectrum(), gamma)?.sqrt();
    let rhs = f_coeffs_h
        .iter()
        .zip(mu)
        .map(|(w, m)| m.powf(1.0 - gamma) * w * w)
        .sum::<f64>()
        .sqrt();
    Ok((lhs - rhs).abs())
}

/// `kappa M_alpha^2 / (n lambda^(gamma + alpha))`, the admissible gap between `V` and `V_1`.
pub fn v_v1_gap_bound(m_alpha: f64, n: usize, gamma: f64, alpha: f64, lambda: f64, kappa: f64) -> f64 {
    kappa * m_alpha * m_alpha / (n as f64 * lambda.powf(gamma + alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Coefficient,
    Gram,
}

/// `V`, `V_1`, `V_2` and the `V_2` rate envelope along a lambda grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub gamma: f64,
    pub lambda: Vec<f64>,
    pub v: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub bound_v2_envelope: Vec<f64>,
    pub route: Route,
}

impl VarianceCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,v,v1,v2,bound_v2_envelope\n");
        for i in 0..self.lambda.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.lambda[i], self.v[i], self.v1[i], self.v2[i], self.bound_v2_envelope[i]
            ));
        }
        out
    }
}

pub fn variance_curve(m: &TruncatedOperatorModel, gamma: f64, lambda_grid: &[f64], route: Route) -> Result<VarianceCurve> {
    let n = m.n();
    let mut curve = VarianceCurve {
        gamma,
        lambda: lambda_grid.to_vec(),
        v: Vec::with_capacity(lambda_grid.len()),
        v1: Vec::with_capacity(lambda_grid.len()),
        v2: Vec::with_capacity(lambda_grid.len()),
        bound_v2_envelope: Vec::with_capacity(lambda_grid.len()),
        route,
    };
    for &lambda in lambda_grid {
        let v = match route {
            Route::Coefficient => v_lambda_coefficient_route(m, gamma, lambda)?,
            Route::Gram => v_lambda_gram_route(m.kernel(), m.points(), gamma, lambda)?,
        };
        curve.v.push(v);
        curve.v1.push(v1_lambda(m, gamma, lambda)?);
        curve.v2.push(v2_lambda(m.spectrum(), gamma, lambda, n)?);
        curve.bound_v2_envelope.push(v2_rate_envelope(m.spectrum(), gamma, lambda, n));
    }
    Ok(curve)
}

/// Monte Carlo check of the operator concentration bound and of the `|V_1 - V_2|` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTrial {
    pub n: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub tau: f64,
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub trial: ConcentrationTrial,
    pub m_alpha: f64,
    pub effective_dimension: f64,
    /// `B = ln(2e N(lambda) (||C|| + lambda) / ||C||)`.
    pub b_nu: f64,
    pub operator_bound: f64,
    pub v_bound: f64,
    pub operator_norms: Vec<f64>,
    pub v_gaps: Vec<f64>,
    pub operator_fraction: f64,
    pub v_fraction: f64,
    pub median_operator_norm: f64,
    pub median_v_gap: f64,
    /// Target frequency `1 - 2 e^-tau`.
    pub guaranteed_fraction: f64,
    /// Both bounds require `lambda` in `(0, 1/2)`.
    pub lambda_in_range: bool,
}

impl ConcentrationTrial {
    pub fn run(&self, k: &SpectralKernel) -> Result<ConcentrationReport> {
        check_gamma(self.gamma)?;
        check_lambda(self.lambda, false)?;
        if self.n == 0 || self.trials == 0 {
            return Err(invalid("n and trials must be positive"));
        }
        if !(self.tau >= 1.0) {
            return Err(invalid(format!("tau must be at least 1 (got {})", self.tau)));
        }
        let spectrum = k.spectrum();
        let m_alpha = embedding_norm(EmbeddingSource::Spectral(k), self.alpha, None)?.m_alpha;
        let nl = effective_dimension(spectrum, self.lambda)?;
        let top = spectrum.top();
        let b_nu = (2.0 * std::f64::consts::E * nl * (top + self.lambda) / top).ln();
        let n = self.n as f64;
        let ma2 = m_alpha * m_alpha;
        let la = self.lambda.powf(self.alpha);
        let operator_bound =
            4.0 * ma2 * self.tau * b_nu / (3.0 * n * la) + (2.0 * ma2 * self.tau * b_nu / (n * la)).sqrt();
        let v_bound = self.tau.sqrt() * ma2
            / (std::f64::consts::SQRT_2 * n.powf(1.5) * self.lambda.powf(self.gamma + self.alpha));
        let v2 = v2_lambda(spectrum, self.gamma, self.lambda, self.n)?;

        let outcomes: Vec<Result<(f64, f64)>> = (0..self.trials)
            .into_par_iter()
            .map(|t| {
                use rand::Rng;
                let mut rng = stream(self.seed, self.n as u64, t as u64, Purpose::Trial);
                let xs: Vec<f64> = (0..self.n).map(|_| rng.random::<f64>()).collect();
                let model = build_operator_model(k, &xs)?;
                let op = whitened_deviation_norm(&model, self.lambda);
                let gap = (v1_lambda(&model, self.gamma, self.lambda)? - v2).abs();
                Ok((op, gap))
            })
            .collect();
        let mut operator_norms = Vec::with_capacity(self.trials);
        let mut v_gaps = Vec::with_capacity(self.trials);
        for o in outcomes {
            let (op, gap) = o?;
            operator_norms.push(op);
            v_gaps.push(gap);
        }
        let frac = |xs: &[f64], bound: f64| xs.iter().filter(|x| **x <= bound).count() as f64 / xs.len() as f64;
        Ok(ConcentrationReport {
            trial: *self,
            m_alpha,
            effective_dimension: nl,
            b_nu,
            operator_bound,
            v_bound,
            operator_fraction: frac(&operator_norms, operator_bound),
            v_fraction: frac(&v_gaps, v_bound),
            median_operator_norm: median(&operator_norms),
            median_v_gap: median(&v_gaps),
            operator_norms,
            v_gaps,
            guaranteed_fraction: 1.0 - 2.0 * (-self.tau).exp(),
            lambda_in_range: self.lambda < 0.5,
        })
    }
}

/// `|| (C + lambda)^-1/2 (C - C_emp) (C + lambda)^-1/2 ||` by dense eigenvalues.
pub fn whitened_deviation_norm(m: &TruncatedOperatorModel, lambda: f64) -> f64 {
    let mu = m.spectrum().mu();
    let mut phi = m.psi.clone();
    for (l, &ml) in mu.iter().enumerate() {
        phi.row_mut(l).scale_mut(1.0 / (ml + lambda).sqrt());
    }
    let mut d = -(&phi * phi.transpose()) / m.n() as f64;
    for (l, &ml) in mu.iter().enumerate() {
        d[(l, l)] += ml / (ml + lambda);
    }
    d.symmetric_eigenvalues().iter().fold(0.0, |acc, e| acc.max(e.abs()))
}
