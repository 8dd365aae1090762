use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::dot_product::DotProductSpectrum;

/// Kernel family of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Cosine basis on `[0, 1]` with `M` power-law eigenvalues.
    Cosine {
        beta: f64,
        zeta: f64,
        #[serde(default = "default_m")]
        m: usize,
    },
    /// Fourier basis on the circle with `M` power-law eigenvalues.
    CircleFourier {
        beta: f64,
        zeta: f64,
        #[serde(default = "default_m")]
        m: usize,
    },
    /// Untruncated cosine kernel, `mu_i = i^-beta`, evaluated in closed form.
    ExactCosine { beta: f64 },
    /// Dot-product kernel on `S^d` from explicit degree eigenvalues.
    DotProduct { spectrum: DotProductSpectrum },
    /// Shallow ReLU NTK on `S^d`, represented by its first `k_max + 1` degrees.
    Ntk { d: usize, k_max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FStar {
    Zero,
    /// `f* = b1 e_1` with the constant eigenfunction `e_1 = 1`.
    SingleMode { b1: f64 },
}

fn default_m() -> usize {
    crate::operators::DEFAULT_OPERATOR_TRUNCATION
}

fn default_n_grid() -> Vec<usize> {
    vec![64, 128, 256, 512, 1024]
}

fn default_replicates() -> usize {
    50
}

fn default_lambda_grid() -> Vec<f64> {
    crate::spectra::geometric_grid(1e-6, 0.25, 13)
}

fn default_sigma() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_f_star() -> FStar {
    FStar::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub gamma: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_f_star")]
    pub f_star: FStar,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Power used for `M_alpha` in the `V` vs `V_1` gap; defaults to `1/beta + 0.05`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding_alpha: Option<f64>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(config_error(format!("gamma must lie in [0, 1) (got {})", self.gamma)));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(config_error(format!("sigma must be positive (got {})", self.sigma)));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(config_error("n_grid must be non-empty with positive sizes"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_error("n_grid must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(config_error("replicates must be at least 1"));
        }
        if self.lambda_grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(config_error("lambda_grid must hold positive reals"));
        }
        if let FStar::SingleMode { b1 } = self.f_star {
            if !b1.is_finite() {
                return Err(config_error("f_star b1 must be finite"));
            }
        }
        if let Some(a) = self.embedding_alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(config_error("embedding_alpha must lie in (0, 1]"));
            }
        }
        match &self.kernel {
            KernelSpec::Cosine { beta, zeta, m } | KernelSpec::CircleFourier { beta, zeta, m } => {
                check_beta(*beta)?;
                if !zeta.is_finite() {
                    return Err(config_error("zeta must be finite"));
                }
                if *m < 2 {
                    return Err(config_error("truncation m must be at least 2"));
                }
            }
            KernelSpec::ExactCosine { beta } => check_beta(*beta)?,
            KernelSpec::DotProduct { .. } => {}
            KernelSpec::Ntk { d, k_max } => {
                if *d == 0 || *k_max < 8 {
                    return Err(config_error("ntk needs d >= 1 and k_max >= 8"));
                }
            }
        }
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("beta must exceed 1 (got {beta})")))
    }
}
