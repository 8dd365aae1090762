//! Symmetric positive-definite solves with an eigen-decomposition fallback.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factorization {
    Cholesky,
    Eigen,
}

/// A factorised symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    inner: Inner,
    condition: f64,
}

#[derive(Debug, Clone)]
enum Inner {
    Cholesky(Cholesky<f64, Dyn>),
    Eigen(SymmetricEigen<f64, Dyn>),
}

impl SpdFactor {
    /// Cholesky first; if it breaks down or its pivots suggest a condition
    /// number beyond `1 / (n eps)`, an eigen-decomposition that accepts the
    /// matrix when its smallest eigenvalue clears `n * eps` of the largest.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if let Some(chol) = Cholesky::new(a.clone()) {
            let condition = cholesky_condition(&chol);
            if condition * n.max(1) as f64 * f64::EPSILON < 1.0 {
                return Ok(SpdFactor {
                    inner: Inner::Cholesky(chol),
                    condition,
                });
            }
        }
        let eig = SymmetricEigen::new(a.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(min > n.max(1) as f64 * f64::EPSILON * max) {
            return Err(Error::SingularGram { condition });
        }
        Ok(SpdFactor {
            inner: Inner::Eigen(eig),
            condition,
        })
    }

    pub fn method(&self) -> Factorization {
        match self.inner {
            Inner::Cholesky(_) => Factorization::Cholesky,
            Inner::Eigen(_) => Factorization::Eigen,
        }
    }

    /// Condition number: exact on the eigen path, `(max L_ii / min L_ii)^2` after Cholesky.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.inner {
            Inner::Cholesky(c) => c.solve(b),
            Inner::Eigen(e) => {
                let mut t = e.eigenvectors.tr_mul(b);
                for (i, lam) in e.eigenvalues.iter().enumerate() {
                    t.row_mut(i).scale_mut(1.0 / lam);
                }
                &e.eigenvectors * t
            }
        }
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.inner {
            Inner::Cholesky(c) => c.solve(b),
            Inner::Eigen(e) => {
                let mut t = e.eigenvectors.tr_mul(b);
                t.component_div_assign(&e.eigenvalues);
                &e.eigenvectors * t
            }
        }
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        match &self.inner {
            Inner::Cholesky(c) => c.inverse(),
            Inner::Eigen(_) => {
                let n = self.dim();
                self.solve(&DMatrix::identity(n, n))
            }
        }
    }

    fn dim(&self) -> usize {
        match &self.inner {
            Inner::Cholesky(c) => c.l_dirty().nrows(),
            Inner::Eigen(e) => e.eigenvalues.len(),
        }
    }
}

fn cholesky_condition(c: &Cholesky<f64, Dyn>) -> f64 {
    let l = c.l_dirty();
    let diag = l.diagonal();
    let max = diag.max();
    let min = diag.min();
    if min > 0.0 {
        (max / min).powi(2)
    } else {
        f64::INFINITY
    }
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
pub fn top_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..200 {
        let w = a * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - estimate).abs() <= 1e-10 * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `tr(A B)` for symmetric `A`, `B` without forming the product.
pub fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}
