use serde::{Deserialize, Serialize};

use super::config::{FStar, KernelSpec};
use super::sampling::Domain;
use crate::error::{Error, Result};
use crate::kernels::dot_product::{DotProductKernel, NtkKernel};
use crate::kernels::exact::ExactCosineKernel;
use crate::kernels::spectral::{Basis, SpectralKernel};
use crate::kernels::PowerKernel;
use crate::solvers::{gamma_error_sq, gamma_error_sq_gram, DualSolution};
use crate::spectra::{embedding_index_by_bisection, make_power_law_spectrum};

/// A resolved experiment kernel.
#[derive(Debug, Clone)]
pub enum ExperimentKernel {
    Spectral(SpectralKernel),
    Exact(ExactCosineKernel),
    Sphere(DotProductKernel),
}

/// Decay parameters and embedding index that feed the predicted exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub family: String,
    pub domain: Domain,
    pub beta: Option<f64>,
    pub zeta: f64,
    /// `1/beta`: every family here has `M_alpha` finite exactly for `alpha > 1/beta`.
    pub alpha_star: Option<f64>,
    /// Bisection on the Cauchy tail test, when the spectrum carries decay parameters.
    pub alpha_star_estimate: Option<f64>,
    /// Eigenvalue of the constant eigenfunction.
    pub leading_eigenvalue: f64,
    pub truncation: Option<usize>,
}

pub fn resolve_kernel(spec: &KernelSpec) -> Result<(ExperimentKernel, KernelProfile)> {
    let config = |e: Error| Error::Config(e.to_string());
    match spec {
        KernelSpec::Cosine { beta, zeta, m } | KernelSpec::CircleFourier { beta, zeta, m } => {
            let (basis, family) = match spec {
                KernelSpec::Cosine { .. } => (Basis::CosineUnitInterval, "cosine"),
                _ => (Basis::CircleFourier, "circle_fourier"),
            };
            let spectrum = make_power_law_spectrum(*beta, *zeta, *m).map_err(config)?;
            let estimate = spectrum.decay().map(|d| embedding_index_by_bisection(d, *m));
            let profile = KernelProfile {
                family: family.into(),
                domain: Domain::UnitInterval,
                beta: Some(*beta),
                zeta: *zeta,
                alpha_star: Some(1.0 / beta),
                alpha_star_estimate: estimate,
                leading_eigenvalue: spectrum.top(),
                truncation: Some(*m),
            };
            Ok((ExperimentKernel::Spectral(SpectralKernel::new(spectrum, basis)), profile))
        }
        KernelSpec::ExactCosine { beta } => {
            let k = ExactCosineKernel::new(*beta).map_err(config)?;
            let profile = KernelProfile {
                family: "exact_cosine".into(),
                domain: Domain::UnitInterval,
                beta: Some(*beta),
                zeta: 0.0,
                alpha_star: Some(1.0 / beta),
                alpha_star_estimate: None,
                leading_eigenvalue: 1.0,
                truncation: None,
            };
            Ok((ExperimentKernel::Exact(k), profile))
        }
        KernelSpec::DotProduct { spectrum } => {
            let d = spectrum.dimension();
            // a_k ~ k^-p with N(d,k) ~ k^(d-1) puts the i-th eigenvalue at i^(-p/d)
            let beta = spectrum
                .fitted_decay_exponent()
                .map(|f| -f.slope / d as f64)
                .filter(|b| *b > 1.0);
            let profile = KernelProfile {
                family: "dot_product".into(),
                domain: Domain::Sphere(d),
                beta,
                zeta: 0.0,
                alpha_star: beta.map(|b| 1.0 / b),
                alpha_star_estimate: None,
                leading_eigenvalue: spectrum.coefficients()[0],
                truncation: Some(spectrum.k_max()),
            };
            Ok((ExperimentKernel::Sphere(DotProductKernel::new(spectrum.clone())), profile))
        }
        KernelSpec::Ntk { d, k_max } => {
            let spectrum = NtkKernel::new(*d).and_then(|k| k.spectrum(*k_max)).map_err(config)?;
            let beta = 1.0 + 1.0 / *d as f64;
            let estimate = spectrum
                .fitted_decay_exponent()
                .map(|f| (*d as f64 / -f.slope).min(1.0));
            let profile = KernelProfile {
                family: "ntk".into(),
                domain: Domain::Sphere(*d),
                beta: Some(beta),
                zeta: 0.0,
                alpha_star: Some(1.0 / beta),
                alpha_star_estimate: estimate,
                leading_eigenvalue: spectrum.coefficients()[0],
                truncation: Some(*k_max),
            };
            Ok((ExperimentKernel::Sphere(DotProductKernel::new(spectrum)), profile))
        }
    }
}

/// How a fitted estimator's γ-error is evaluated for a kernel family.
pub trait ErrorRoute: PowerKernel + Sized {
    fn gamma_error(&self, sol: &DualSolution<Self>, gamma: f64, f_star: FStar, mu1: f64) -> Result<f64>;
}

fn b1(f: FStar) -> f64 {
    match f {
        FStar::Zero => 0.0,
        FStar::SingleMode { b1 } => b1,
    }
}

impl ErrorRoute for SpectralKernel {
    fn gamma_error(&self, sol: &DualSolution<Self>, gamma: f64, f_star: FStar, _mu1: f64) -> Result<f64> {
        let target = match f_star {
            FStar::Zero => vec![],
            FStar::SingleMode { b1 } => vec![b1],
        };
        gamma_error_sq(sol, &target, gamma)
    }
}

impl ErrorRoute for ExactCosineKernel {
    fn gamma_error(&self, sol: &DualSolution<Self>, gamma: f64, f_star: FStar, mu1: f64) -> Result<f64> {
        gamma_error_sq_gram(sol, gamma, b1(f_star), mu1)
    }
}

impl ErrorRoute for DotProductKernel {
    fn gamma_error(&self, sol: &DualSolution<Self>, gamma: f64, f_star: FStar, mu1: f64) -> Result<f64> {
        gamma_error_sq_gram(sol, gamma, b1(f_star), mu1)
    }
}
