use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Kernel, PowerKernel};
use crate::error::{invalid, Error, Result};
use crate::spectra::Spectrum;

/// Orthonormal eigenbases with `sup |e_i| <= sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `e_1 = 1`, `e_i(x) = sqrt(2) cos((i-1) pi x)` on `[0, 1]` with Lebesgue measure.
    CosineUnitInterval,
    /// `e_1 = 1`, `e_{2k} = sqrt(2) cos(2 pi k x)`, `e_{2k+1} = sqrt(2) sin(2 pi k x)`,
    /// circle parametrised by `x` in `[0, 1]`.
    CircleFourier,
}

impl Basis {
    pub fn domain_name(&self) -> &'static str {
        match self {
            Basis::CosineUnitInterval => "[0, 1]",
            Basis::CircleFourier => "circle [0, 1)",
        }
    }

    /// `e_1(x), ..., e_m(x)`.
    pub fn values(&self, x: f64, m: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(m);
        self.values_into(x, &mut out, m);
        out
    }

    fn values_into(&self, x: f64, out: &mut Vec<f64>, m: usize) {
        out.clear();
        if m == 0 {
            return;
        }
        out.push(1.0);
        match self {
            Basis::CosineUnitInterval => {
                for k in 1..m {
                    out.push(SQRT_2 * (k as f64 * PI * x).cos());
                }
            }
            Basis::CircleFourier => {
                let mut k = 1;
                while out.len() < m {
                    let arg = 2.0 * PI * k as f64 * x;
                    out.push(SQRT_2 * arg.cos());
                    if out.len() < m {
                        out.push(SQRT_2 * arg.sin());
                    }
                    k += 1;
                }
            }
        }
    }
}

/// A Mercer kernel `K(x, y) = sum_{i <= M} mu_i e_i(x) e_i(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralKernel {
    spectrum: Spectrum,
    basis: Basis,
}

impl SpectralKernel {
    pub fn new(spectrum: Spectrum, basis: Basis) -> Self {
        SpectralKernel { spectrum, basis }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Truncation size.
    pub fn m(&self) -> usize {
        self.spectrum.len()
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        let ok = match self.basis {
            Basis::CosineUnitInterval => (0.0..=1.0).contains(&x),
            Basis::CircleFourier => (0.0..=1.0).contains(&x),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                point: format!("{x}"),
                domain: self.basis.domain_name(),
            })
        }
    }

    pub fn basis_values(&self, x: f64) -> Vec<f64> {
        self.basis.values(x, self.m())
    }

    /// `M x n` matrix with columns `(e_1(x_j), ..., e_M(x_j))`.
    pub fn basis_matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        let m = self.m();
        let mut e = DMatrix::zeros(m, xs.len());
        let mut buf = Vec::with_capacity(m);
        for (j, &x) in xs.iter().enumerate() {
            self.basis.values_into(x, &mut buf, m);
            e.column_mut(j).copy_from_slice(&buf);
        }
        e
    }

    /// Columns `diag(mu^(s/2)) e(x_j)`; `s = 1` gives the `psi` features.
    pub fn weighted_basis_matrix(&self, xs: &[f64], s: f64) -> DMatrix<f64> {
        let mut e = self.basis_matrix(xs);
        for (i, mu) in self.spectrum.mu().iter().enumerate() {
            let w = mu.powf(0.5 * s);
            e.row_mut(i).scale_mut(w);
        }
        e
    }

    fn power_sum(&self, s: f64, x: f64, y: f64) -> f64 {
        let ex = self.basis_values(x);
        let ey = self.basis_values(y);
        let mu = self.spectrum.mu();
        if s == 1.0 {
            (0..mu.len()).map(|i| mu[i] * ex[i] * ey[i]).sum()
        } else {
            (0..mu.len()).map(|i| mu[i].powf(s) * ex[i] * ey[i]).sum()
        }
    }
}

/// `sum_{i <= M} mu_i^s e_i(x) e_i(y)`.
pub fn fractional_power_kernel_eval(k: &SpectralKernel, s: f64, x: f64, y: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(invalid(format!("power must be non-negative (got {s})")));
    }
    k.check_point(x)?;
    k.check_point(y)?;
    Ok(k.power_sum(s, x, y))
}

impl Kernel for SpectralKernel {
    type Point = f64;

    fn check_point(&self, x: &f64) -> Result<()> {
        SpectralKernel::check_point(self, *x)
    }

    fn eval_unchecked(&self, x: &f64, y: &f64) -> f64 {
        self.power_sum(1.0, *x, *y)
    }

    fn gram(&self, xs: &[f64]) -> DMatrix<f64> {
        let psi = self.weighted_basis_matrix(xs, 1.0);
        psi.tr_mul(&psi)
    }
}

impl PowerKernel for SpectralKernel {
    fn eval_power_unchecked(&self, s: f64, x: &f64, y: &f64) -> f64 {
        self.power_sum(s, *x, *y)
    }

    fn gram_power(&self, s: f64, xs: &[f64]) -> DMatrix<f64> {
        let w = self.weighted_basis_matrix(xs, s);
        w.tr_mul(&w)
    }
}
