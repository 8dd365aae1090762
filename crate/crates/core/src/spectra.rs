//! Eigenvalue sequences with power-law-times-log decay and the quantities that
//! depend on the spectrum alone: effective dimension, embedding norms and
//! index, the inconsistency exponent, and the `V_2` sum.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::dot_product::DotProductSpectrum;
use crate::kernels::spectral::{Basis, SpectralKernel};
use crate::special::log_space_tail;
use crate::stats::{fit_loglog_slope, ols, LogLogFit};

/// Relative Cauchy tolerance for deciding whether a tail series settles.
pub const CAUCHY_TOLERANCE: f64 = 1e-6;
/// Default truncation for quantities that only need the eigenvalues.
pub const DEFAULT_SPECTRUM_TRUNCATION: usize = 10_000;
/// Largest log-index the tail test explores before declaring divergence.
const LOG_INDEX_LIMIT: f64 = 1e7;

/// Decay parameters of `mu_i ~ (i (log i)^zeta)^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub beta: f64,
    pub zeta: f64,
}

impl Decay {
    /// `(i (ln i)^zeta)^(-beta)` for `i >= 2`.
    pub fn profile(&self, i: usize) -> f64 {
        let x = i as f64;
        (x * x.ln().powf(self.zeta)).powf(-self.beta)
    }
}

/// Observed constants of the two-sided envelope `c_low * profile <= mu <= c_high * profile`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub c_low: f64,
    pub c_high: f64,
}

/// A truncated, strictly positive, non-increasing eigenvalue sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    mu: Vec<f64>,
    decay: Option<Decay>,
    envelope: Option<Envelope>,
    tail_mass: f64,
}

/// `mu_1 = 1`, `mu_i = (i (ln i)^zeta)^(-beta)` for `2 <= i <= m`, made
/// non-increasing by a running minimum.
pub fn make_power_law_spectrum(beta: f64, zeta: f64, m: usize) -> Result<Spectrum> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must exceed 1 (got {beta})")));
    }
    if !zeta.is_finite() {
        return Err(invalid("zeta must be finite"));
    }
    if m < 2 {
        return Err(invalid(format!("truncation must be at least 2 (got {m})")));
    }
    let decay = Decay { beta, zeta };
    let mut mu = Vec::with_capacity(m);
    mu.push(1.0);
    let mut c_low = f64::INFINITY;
    let mut c_high: f64 = 0.0;
    for i in 2..=m {
        let raw = decay.profile(i);
        let prev = mu[i - 2];
        let value = raw.min(prev);
        let ratio = value / raw;
        c_low = c_low.min(ratio);
        c_high = c_high.max(ratio);
        mu.push(value);
    }
    let tail_mass = log_space_tail(
        beta - 1.0,
        zeta * beta,
        (m as f64).ln(),
        1e-12,
        LOG_INDEX_LIMIT,
    )
    .ok_or_else(|| invalid("spectrum tail does not converge"))?;
    Ok(Spectrum {
        mu,
        decay: Some(decay),
        envelope: Some(Envelope { c_low, c_high }),
        tail_mass,
    })
}

impl Spectrum {
    /// Wraps an explicit eigenvalue list (no tail, no decay metadata).
    pub fn from_eigenvalues(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(invalid("spectrum must be non-empty"));
        }
        if mu.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(invalid("eigenvalues must be finite and strictly positive"));
        }
        if mu.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("eigenvalues must be non-increasing"));
        }
        Ok(Spectrum {
            mu,
            decay: None,
            envelope: None,
            tail_mass: 0.0,
        })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    /// Integral estimate of the discarded mass `sum_{i > M} mu_i`.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn trace(&self) -> f64 {
        self.mu.iter().sum::<f64>() + self.tail_mass
    }

    /// Largest eigenvalue, the operator norm of `C_nu`.
    pub fn top(&self) -> f64 {
        self.mu[0]
    }

    /// Elementwise power `mu_i^s`, dropping decay metadata.
    pub fn powered(&self, s: f64) -> Spectrum {
        Spectrum {
            mu: self.mu.iter().map(|m| m.powf(s)).collect(),
            decay: self.decay.map(|d| Decay {
                beta: d.beta * s,
                zeta: d.zeta,
            }),
            envelope: None,
            tail_mass: 0.0,
        }
    }

    /// `sum_i mu_i^(2-gamma) / (mu_i + lambda)^2`, the unnormalised `V_2` sum.
    pub fn v2_sum(&self, gamma: f64, lambda: f64) -> f64 {
        let p = 2.0 - gamma;
        self.mu
            .iter()
            .map(|&m| {
                let r = m / (m + lambda);
                // mu^(2-g)/(mu+l)^2 = (mu/(mu+l))^2 mu^-g
                r * r * m.powf(p - 2.0)
            })
            .sum()
    }

    /// Upper bound `tail_mass / lambda^2` on what truncation drops from `V`-type sums.
    pub fn truncation_bound(&self, lambda: f64) -> f64 {
        self.tail_mass / (lambda * lambda)
    }
}

/// `N(lambda) = sum_i mu_i / (mu_i + lambda)`.
pub fn effective_dimension(s: &Spectrum, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive (got {lambda})")));
    }
    Ok(s.mu.iter().map(|&m| m / (m + lambda)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMethod {
    ClosedFormCosine,
    ClosedFormSphere,
    GridSup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub alpha: f64,
    /// The embedding norm `M_alpha` (not squared).
    pub m_alpha: f64,
    /// Numerical embedding index, `None` when the spectrum carries no decay
    /// information to extrapolate from.
    pub alpha_star_estimate: Option<f64>,
    /// Whether the embedding series is numerically finite at the estimate.
    pub finite_at_estimate: Option<bool>,
    /// Extrapolated contribution of the discarded tail to `M_alpha^2`.
    pub tail_contribution: f64,
    pub method: EmbeddingMethod,
}

/// What `embedding_norm` is computed for.
#[derive(Debug, Clone, Copy)]
pub enum EmbeddingSource<'a> {
    Spectral(&'a SpectralKernel),
    DotProduct(&'a DotProductSpectrum),
}

/// Default sup-grid resolution for bases without a closed-form maximiser.
const DEFAULT_SUP_GRID: usize = 4097;

/// `M_alpha = || sum_i mu_i^alpha e_i^2 ||_inf^(1/2)`.
pub fn embedding_norm(
    source: EmbeddingSource<'_>,
    alpha: f64,
    grid: Option<&[f64]>,
) -> Result<EmbeddingReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1] (got {alpha})")));
    }
    match source {
        EmbeddingSource::Spectral(k) => spectral_embedding(k, alpha, grid),
        EmbeddingSource::DotProduct(s) => sphere_embedding(s, alpha),
    }
}

fn spectral_embedding(
    k: &SpectralKernel,
    alpha: f64,
    grid: Option<&[f64]>,
) -> Result<EmbeddingReport> {
    let spectrum = k.spectrum();
    // every basis here satisfies sup_x e_i(x)^2 <= 2
    let sup_sq_bound = 2.0;
    let tail = match spectrum.decay() {
        Some(d) => {
            sup_sq_bound * power_series_tail(d, alpha, spectrum.len()).ok_or(Error::DivergentEmbedding { alpha })?
        }
        None => 0.0,
    };
    let (head, method) = match (k.basis(), grid) {
        (Basis::CosineUnitInterval, None) => {
            let mu = spectrum.mu();
            let rest: f64 = mu[1..].iter().map(|m| m.powf(alpha)).sum();
            (mu[0].powf(alpha) + 2.0 * rest, EmbeddingMethod::ClosedFormCosine)
        }
        (_, grid) => {
            let owned;
            let points = match grid {
                Some(g) => g,
                None => {
                    owned = (0..DEFAULT_SUP_GRID)
                        .map(|j| j as f64 / (DEFAULT_SUP_GRID - 1) as f64)
                        .collect::<Vec<_>>();
                    &owned
                }
            };
            if points.is_empty() {
                return Err(invalid("sup grid must be non-empty"));
            }
            let powered: Vec<f64> = spectrum.mu().iter().map(|m| m.powf(alpha)).collect();
            let mut best: f64 = 0.0;
            for &x in points {
                k.check_point(x)?;
                let e = k.basis_values(x);
                let v: f64 = powered.iter().zip(&e).map(|(p, ei)| p * ei * ei).sum();
                best = best.max(v);
            }
            (best, EmbeddingMethod::GridSup)
        }
    };
    let (alpha_star, finite_at_star) = match spectrum.decay() {
        Some(d) => {
            let star = embedding_index_by_bisection(d, spectrum.len());
            let finite = power_series_tail(d, star, spectrum.len()).is_some();
            (Some(star), Some(finite))
        }
        None => (fitted_index(spectrum.mu()), None),
    };
    Ok(EmbeddingReport {
        alpha,
        m_alpha: (head + tail).sqrt(),
        alpha_star_estimate: alpha_star,
        finite_at_estimate: finite_at_star,
        tail_contribution: tail,
        method,
    })
}

fn sphere_embedding(s: &DotProductSpectrum, alpha: f64) -> Result<EmbeddingReport> {
    let d = s.dimension() as f64;
    let head: f64 = s
        .coefficients()
        .iter()
        .zip(s.multiplicities())
        .map(|(&a, &n)| if a > 0.0 { a.powf(alpha) * n } else { 0.0 })
        .sum();
    // a_k ~ k^-p  =>  sum_k a_k^alpha N(d,k) ~ sum_k k^(d-1-p alpha), finite iff p alpha > d
    let decay = s.fitted_decay_exponent();
    let (alpha_star, tail) = match decay {
        Some(fit) => {
            let p = -fit.slope;
            let star = (d / p).min(1.0);
            if p * alpha <= d {
                return Err(Error::DivergentEmbedding { alpha });
            }
            let k_max = s.coefficients().len() as f64;
            let expo = p * alpha - d;
            // sum_{k > K} C k^(d-1-p alpha) with C = e^{intercept alpha} * 2 k^{d-1}/(d-1)! ~ integral
            let c = (fit.intercept * alpha).exp() * multiplicity_leading_constant(s.dimension());
            (Some(star), c * k_max.powf(-expo) / expo)
        }
        None => (None, 0.0),
    };
    Ok(EmbeddingReport {
        alpha,
        m_alpha: (head + tail).sqrt(),
        alpha_star_estimate: alpha_star,
        finite_at_estimate: alpha_star.map(|a| a * decay.map_or(0.0, |f| -f.slope) > d),
        tail_contribution: tail,
        method: EmbeddingMethod::ClosedFormSphere,
    })
}

// N(d, k) ~ 2 k^(d-1) / (d-1)!
fn multiplicity_leading_constant(d: usize) -> f64 {
    let fact: f64 = (1..d).map(|j| j as f64).product();
    2.0 / fact
}

/// Tail `sum_{i > m} profile(i)^alpha` by integral comparison, `None` if the
/// Cauchy test fails.
fn power_series_tail(d: Decay, alpha: f64, m: usize) -> Option<f64> {
    let p = alpha * d.beta - 1.0;
    let q = alpha * d.beta * d.zeta;
    log_space_tail(p, q, (m.max(2) as f64).ln(), CAUCHY_TOLERANCE, LOG_INDEX_LIMIT)
}

/// Bisection on `alpha` for the smallest power at which the embedding series
/// passes the Cauchy tail test.
pub fn embedding_index_by_bisection(d: Decay, m: usize) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    if power_series_tail(d, hi, m).is_none() {
        return 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if power_series_tail(d, mid, m).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    hi
}

// 1/beta from a log-log fit over the upper half of an explicit spectrum.
fn fitted_index(mu: &[f64]) -> Option<f64> {
    if mu.len() < 8 {
        return None;
    }
    let start = mu.len() / 2;
    let xs: Vec<f64> = (start..mu.len()).map(|i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = mu[start..].iter().map(|m| m.ln()).collect();
    let (slope, _, _) = ols(&xs, &ys).ok()?;
    let beta = -slope;
    (beta > 0.0).then(|| (1.0 / beta).min(1.0))
}

/// Inconsistency regime predicted from `gamma` vs `3 (alpha* - 1/beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `gamma > 3 (alpha* - 1/beta)`: error grows without bound.
    Inconsistent,
    /// `gamma == 3 (alpha* - 1/beta)`: error bounded below by `n^-eps`.
    GeneralizesPoorly,
    /// Below the threshold, the lower bound decays and says nothing.
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalExponent {
    /// Exponent of `n` in the lower bound on the expected gamma-error.
    pub exponent: f64,
    /// `3 (alpha* - 1/beta)`.
    pub threshold: f64,
    /// Exponent of `log n` in the sharpened bound when `M_{alpha*}` is finite.
    pub log_exponent: f64,
    pub classification: Classification,
}

const CLASSIFY_TOL: f64 = 1e-12;

/// `(gamma - 3 (alpha* - 1/beta)) / (3 alpha* - 2/beta)` and its regime.
pub fn theoretical_exponent(
    gamma: f64,
    beta: f64,
    zeta: f64,
    alpha_star: f64,
) -> Result<TheoreticalExponent> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1) (got {gamma})")));
    }
    if !(beta > 1.0) {
        return Err(invalid(format!("beta must exceed 1 (got {beta})")));
    }
    let inv_beta = 1.0 / beta;
    if alpha_star < inv_beta - CLASSIFY_TOL || alpha_star > 1.0 + CLASSIFY_TOL {
        return Err(invalid(format!(
            "alpha* must lie in [1/beta, 1] (got {alpha_star}, 1/beta = {inv_beta})"
        )));
    }
    let threshold = 3.0 * (alpha_star - inv_beta);
    let denom = 3.0 * alpha_star - 2.0 * inv_beta;
    let exponent = (gamma - threshold) / denom;
    let log_exponent = -(gamma + inv_beta) / denom * (1.0 + 2.0 * zeta);
    let classification = if (gamma - threshold).abs() <= CLASSIFY_TOL {
        Classification::GeneralizesPoorly
    } else if gamma > threshold {
        Classification::Inconsistent
    } else {
        Classification::Undetermined
    };
    Ok(TheoreticalExponent {
        exponent,
        threshold,
        log_exponent,
        classification,
    })
}

/// `S(lambda) = sum_i mu_i^(2-gamma) / (mu_i + lambda)^2` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub lambda: Vec<f64>,
    pub value: Vec<f64>,
    /// Slope of `log S` against `log(1/lambda)`, when at least 3 grid points.
    pub slope: Option<LogLogFit>,
}

impl Curve {
    /// CSV with header `lambda,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,value\n");
        for (l, v) in self.lambda.iter().zip(&self.value) {
            out.push_str(&format!("{l:e},{v:e}\n"));
        }
        out
    }
}

pub fn v2_envelope(s: &Spectrum, gamma: f64, lambda_grid: &[f64]) -> Result<Curve> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("gamma must lie in [0, 1) (got {gamma})")));
    }
    if lambda_grid.is_empty() {
        return Err(invalid("lambda grid must be non-empty"));
    }
    if lambda_grid.iter().any(|l| !(*l > 0.0 && *l < 0.5)) {
        return Err(invalid("lambda grid must lie inside (0, 1/2)"));
    }
    let value: Vec<f64> = lambda_grid.iter().map(|&l| s.v2_sum(gamma, l)).collect();
    let slope = if lambda_grid.len() >= 3 {
        let inv: Vec<f64> = lambda_grid.iter().map(|l| 1.0 / l).collect();
        Some(fit_loglog_slope(&inv, &value)?)
    } else {
        None
    };
    Ok(Curve {
        lambda: lambda_grid.to_vec(),
        value,
        slope,
    })
}

/// Geometric grid of `count` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|j| lo * (ratio * j as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::spectral::Basis;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_small_case_is_already_monotone() {
        let s = make_power_law_spectrum(2.0, 0.0, 3).unwrap();
        assert_eq!(s.mu(), &[1.0, 0.25, 1.0 / 9.0]);
        let s2 = make_power_law_spectrum(2.0, 0.0, 2).unwrap();
        assert!(s2.mu()[0] >= s2.mu()[1]);
    }

    #[test]
    fn negative_zeta_gets_running_minimum() {
        // phi(i) = i (ln i)^-1 is larger at 2 than at 3
        let phi = |i: f64| i / i.ln();
        assert!(phi(2.0) > phi(3.0));
        assert!((phi(2.0) - 2.885).abs() < 1e-3 && (phi(3.0) - 2.731).abs() < 1e-3);
        let s = make_power_law_spectrum(2.0, -1.0, 4).unwrap();
        assert!(s.mu().windows(2).all(|w| w[1] <= w[0]));
        let raw3 = phi(3.0).powf(-2.0);
        assert!(s.mu()[2] < raw3);
        let env = s.envelope().unwrap();
        assert!(env.c_low > 0.0 && env.c_low <= env.c_high && env.c_high <= 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_power_law_spectrum(1.0, 0.0, 10).is_err());
        assert!(make_power_law_spectrum(2.0, 0.0, 1).is_err());
        assert!(Spectrum::from_eigenvalues(vec![1.0, 2.0]).is_err());
        assert!(Spectrum::from_eigenvalues(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn tail_mass_matches_integral() {
        // zeta = 0: int_M^inf x^-2 dx = 1/M
        let s = make_power_law_spectrum(2.0, 0.0, 100).unwrap();
        assert_relative_eq!(s.tail_mass(), 0.01, max_relative = 1e-8);
    }

    #[test]
    fn effective_dimension_examples() {
        let s = Spectrum::from_eigenvalues(vec![1.0, 0.25, 1.0 / 9.0]).unwrap();
        assert_relative_eq!(effective_dimension(&s, 1.0).unwrap(), 0.8, max_relative = 1e-14);
        let one = Spectrum::from_eigenvalues(vec![0.3]).unwrap();
        assert_relative_eq!(effective_dimension(&one, 0.3).unwrap(), 0.5);
        assert!(effective_dimension(&one, 1e300).unwrap() < 1e-299);
        assert!(effective_dimension(&one, 0.0).is_err());
    }

    #[test]
    fn cosine_embedding_closed_form() {
        let k = SpectralKernel::new(Spectrum::from_eigenvalues(vec![1.0]).unwrap(), Basis::CosineUnitInterval);
        let r = embedding_norm(EmbeddingSource::Spectral(&k), 1.0, None).unwrap();
        assert_relative_eq!(r.m_alpha, 1.0);
        assert_eq!(r.method, EmbeddingMethod::ClosedFormCosine);

        let k = SpectralKernel::new(
            Spectrum::from_eigenvalues(vec![1.0, 0.25]).unwrap(),
            Basis::CosineUnitInterval,
        );
        let r = embedding_norm(EmbeddingSource::Spectral(&k), 1.0, None).unwrap();
        assert_relative_eq!(r.m_alpha * r.m_alpha, 1.5, max_relative = 1e-14);
        // the grid sup agrees since the maximiser x = 0 is on the grid
        let g = embedding_norm(EmbeddingSource::Spectral(&k), 1.0, Some(&[0.0, 0.3, 0.5])).unwrap();
        assert_relative_eq!(g.m_alpha, r.m_alpha, max_relative = 1e-14);
        assert_eq!(g.method, EmbeddingMethod::GridSup);
    }

    #[test]
    fn sphere_embedding_uses_multiplicities() {
        let s = DotProductSpectrum::new(2, vec![1.0, 0.125]).unwrap();
        let r = embedding_norm(EmbeddingSource::DotProduct(&s), 1.0, None).unwrap();
        assert_relative_eq!(r.m_alpha * r.m_alpha, 1.0 + 3.0 / 8.0, max_relative = 1e-14);
        assert_eq!(r.method, EmbeddingMethod::ClosedFormSphere);
    }

    #[test]
    fn embedding_diverges_below_index() {
        let spec = make_power_law_spectrum(2.0, 0.0, 1000).unwrap();
        let k = SpectralKernel::new(spec, Basis::CosineUnitInterval);
        assert!(matches!(
            embedding_norm(EmbeddingSource::Spectral(&k), 0.4, None),
            Err(Error::DivergentEmbedding { .. })
        ));
        let r = embedding_norm(EmbeddingSource::Spectral(&k), 1.0, None).unwrap();
        let star = r.alpha_star_estimate.unwrap();
        assert!((0.5..0.5 + 1e-4).contains(&star), "alpha* estimate {star}");
        // larger alpha means smaller weights
        let r2 = embedding_norm(EmbeddingSource::Spectral(&k), 0.8, None).unwrap();
        assert!(r2.m_alpha >= r.m_alpha);
    }

    #[test]
    fn exponent_examples() {
        let t = theoretical_exponent(0.0, 2.0, 0.0, 0.5).unwrap();
        assert_eq!(t.exponent, 0.0);
        assert_eq!(t.classification, Classification::GeneralizesPoorly);
        let t = theoretical_exponent(0.5, 2.0, 0.0, 0.5).unwrap();
        assert_relative_eq!(t.exponent, 1.0, max_relative = 1e-14);
        assert_eq!(t.classification, Classification::Inconsistent);
        let (beta, star) = (3.0, 0.6);
        let g = 3.0 * (star - 1.0 / beta);
        let t = theoretical_exponent(g, beta, 0.0, star).unwrap();
        assert!(t.exponent.abs() < 1e-12);
        let t = theoretical_exponent(0.1, beta, 0.0, star).unwrap();
        assert_eq!(t.classification, Classification::Undetermined);
        assert!(theoretical_exponent(0.5, 2.0, 0.0, 0.4).is_err());
        assert!(theoretical_exponent(1.0, 2.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn v2_envelope_examples() {
        let one = Spectrum::from_eigenvalues(vec![1.0]).unwrap();
        let c = v2_envelope(&one, 0.0, &[0.25]).unwrap();
        assert_relative_eq!(c.value[0], 0.64, max_relative = 1e-14);
        assert!(c.slope.is_none());
        let two = Spectrum::from_eigenvalues(vec![1.0, 0.25]).unwrap();
        let c = v2_envelope(&two, 0.5, &[0.25]).unwrap();
        assert_relative_eq!(c.value[0], 1.14, max_relative = 1e-14);
        assert!(v2_envelope(&one, 0.0, &[]).is_err());
        assert!(v2_envelope(&one, 0.0, &[0.5]).is_err());
        assert!(c.to_csv().starts_with("lambda,value\n"));
    }
}
