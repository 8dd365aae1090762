//! Monte Carlo experiment runner: sampling, noise, replicate orchestration,
//! exponent fitting and report files.
//!
//! Every `(n, replicate)` cell draws from its own RNG streams
//! ([`crate::rng::stream`]), so results do not depend on scheduling and
//! reruns with the same seed are byte-identical.

pub mod config;
pub mod inconsistency;
pub mod kernel;
pub mod sampling;
pub mod variance;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use crate::stats::fit_loglog_slope;
pub use config::{ExperimentConfig, FStar, KernelSpec};
pub use inconsistency::{run_inconsistency_experiment, write_inconsistency_outputs, ExperimentResult};
pub use kernel::{resolve_kernel, ExperimentKernel, KernelProfile};
pub use sampling::{make_responses, sample_inputs, Domain, Points};
pub use variance::{run_variance_experiment, write_variance_outputs, VarianceReport};

use crate::error::Result;

/// Fraction of failed replicates at one `n` above which a run is flagged.
pub const FAILURE_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub seconds: f64,
    pub threads: usize,
}

pub(crate) fn exceeds_failure_limit(failures: usize, total: usize) -> bool {
    failures as f64 > FAILURE_LIMIT * total as f64
}

/// Shortest round-trip formatting, `NaN` for missing values.
pub(crate) fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
