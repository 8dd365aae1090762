use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::kernel::{resolve_kernel, ErrorRoute, ExperimentKernel, KernelProfile};
use super::sampling::{make_responses, sample_inputs, Points};
use super::{exceeds_failure_limit, fmt_value, write_file, Runtime};
use crate::error::{invalid, Result};
use crate::rng::{stream, Purpose};
use crate::solvers::{interpolate, SampleSet};
use crate::spectra::{theoretical_exponent, TheoreticalExponent};
use crate::stats::{fit_loglog_slope, mean_and_stderr, quantile, LogLogFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub n: usize,
    pub replicate: usize,
    pub gamma_error_sq: Option<f64>,
    /// Absolute jitter added to `K(X,X)`; nonzero marks a jittered interpolant.
    pub jitter_used: Option<f64>,
    pub condition: Option<f64>,
    pub error: Option<String>,
}

/// Aggregate over the successful replicates at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    pub n: usize,
    pub successes: usize,
    pub failures: usize,
    pub jittered: usize,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub q10: Option<f64>,
    pub median: Option<f64>,
    pub q90: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub kernel: KernelProfile,
    pub theory: Option<TheoreticalExponent>,
    pub per_n: Vec<NSummary>,
    /// Slope of `ln mean` against `ln n`.
    pub fitted_slope: Option<LogLogFit>,
    /// Why no slope was reported, when it was not.
    pub slope_note: Option<String>,
    pub failure_limit_exceeded: bool,
    pub replicates: Vec<ReplicateRecord>,
    pub runtime: Runtime,
}

struct CellOutcome {
    error: f64,
    jitter: f64,
    condition: f64,
}

fn run_cell<K: ErrorRoute>(
    k: &K,
    x: Vec<K::Point>,
    cfg: &ExperimentConfig,
    n: usize,
    r: usize,
    mu1: f64,
) -> Result<CellOutcome> {
    let y = make_responses(n, cfg.f_star, cfg.sigma, &mut stream(cfg.seed, n as u64, r as u64, Purpose::Noise));
    let samples = SampleSet::new(x, y)?;
    let sol = interpolate(k, &samples)?;
    let error = k.gamma_error(&sol, cfg.gamma, cfg.f_star, mu1)?;
    let info = sol.info();
    Ok(CellOutcome {
        error,
        jitter: info.jitter_used,
        condition: info.condition,
    })
}

fn dispatch(
    kernel: &ExperimentKernel,
    points: Points,
    cfg: &ExperimentConfig,
    n: usize,
    r: usize,
    mu1: f64,
) -> Result<CellOutcome> {
    match (kernel, points) {
        (ExperimentKernel::Spectral(k), Points::Interval(x)) => run_cell(k, x, cfg, n, r, mu1),
        (ExperimentKernel::Exact(k), Points::Interval(x)) => run_cell(k, x, cfg, n, r, mu1),
        (ExperimentKernel::Sphere(k), Points::Sphere(x)) => run_cell(k, x, cfg, n, r, mu1),
        _ => Err(invalid("sampled points do not match the kernel domain")),
    }
}

fn summarise(n: usize, records: &[ReplicateRecord]) -> NSummary {
    let values: Vec<f64> = records.iter().filter_map(|r| r.gamma_error_sq).collect();
    let failures = records.len() - values.len();
    let jittered = records
        .iter()
        .filter(|r| r.jitter_used.is_some_and(|j| j > 0.0))
        .count();
    let finite = |v: f64| v.is_finite().then_some(v);
    let (mean, stderr) = mean_and_stderr(&values);
    NSummary {
        n,
        successes: values.len(),
        failures,
        jittered,
        mean: finite(mean),
        stderr: finite(stderr),
        q10: finite(quantile(&values, 0.1)),
        median: finite(quantile(&values, 0.5)),
        q90: finite(quantile(&values, 0.9)),
    }
}

fn fit_slope(per_n: &[NSummary], replicates: usize) -> (Option<LogLogFit>, Option<String>) {
    if per_n.len() < 3 {
        return (None, Some("fewer than 3 sample sizes".into()));
    }
    if let Some(s) = per_n.iter().find(|s| exceeds_failure_limit(s.failures, replicates)) {
        return (None, Some(format!("{} of {} replicates failed at n = {}", s.failures, replicates, s.n)));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in per_n {
        match s.mean {
            Some(m) if m > 0.0 => {
                xs.push(s.n as f64);
                ys.push(m);
            }
            _ => return (None, Some(format!("mean error at n = {} is not positive", s.n))),
        }
    }
    match fit_loglog_slope(&xs, &ys) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Interpolate `replicates` fresh samples at every `n`, record the γ-errors,
/// and fit their growth rate in `n`.
pub fn run_inconsistency_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let (kernel, profile) = resolve_kernel(&cfg.kernel)?;
    let theory = match (profile.beta, profile.alpha_star) {
        (Some(beta), Some(a)) => theoretical_exponent(cfg.gamma, beta, profile.zeta, a).ok(),
        _ => None,
    };
    let cells: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r)))
        .collect();
    let mu1 = profile.leading_eigenvalue;
    let records: Vec<ReplicateRecord> = cells
        .par_iter()
        .map(|&(n, r)| {
            let x = sample_inputs(profile.domain, n, &mut stream(cfg.seed, n as u64, r as u64, Purpose::Inputs));
            match dispatch(&kernel, x, cfg, n, r, mu1) {
                Ok(out) => ReplicateRecord {
                    n,
                    replicate: r,
                    gamma_error_sq: Some(out.error),
                    jitter_used: Some(out.jitter),
                    condition: Some(out.condition),
                    error: None,
                },
                Err(e) => {
                    warn!("n = {n}, replicate {r}: {e}");
                    ReplicateRecord {
                        n,
                        replicate: r,
                        gamma_error_sq: None,
                        jitter_used: None,
                        condition: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let per_n: Vec<NSummary> = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let rows: Vec<ReplicateRecord> = records.iter().filter(|r| r.n == n).cloned().collect();
            summarise(n, &rows)
        })
        .collect();
    let failure_limit_exceeded = per_n
        .iter()
        .any(|s| exceeds_failure_limit(s.failures, cfg.replicates));
    let (fitted_slope, slope_note) = fit_slope(&per_n, cfg.replicates);
    if let Some(fit) = fitted_slope {
        info!("fitted slope {:.3} +/- {:.3}", fit.slope, fit.stderr);
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        kernel: profile,
        theory,
        per_n,
        fitted_slope,
        slope_note,
        failure_limit_exceeded,
        replicates: records,
        runtime: Runtime {
            seconds: start.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        },
    })
}

impl ExperimentResult {
    pub fn errors_csv(&self) -> String {
        let mut out = String::from("n,replicate,gamma_error_sq\n");
        for r in &self.replicates {
            let v = r.gamma_error_sq.unwrap_or(f64::NAN);
            out.push_str(&format!("{},{},{}\n", r.n, r.replicate, fmt_value(v)));
        }
        out
    }

    pub fn means_csv(&self) -> String {
        let mut out = String::from("n,successes,failures,mean,stderr,q10,median,q90\n");
        let f = |v: Option<f64>| fmt_value(v.unwrap_or(f64::NAN));
        for s in &self.per_n {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.n,
                s.successes,
                s.failures,
                f(s.mean),
                f(s.stderr),
                f(s.q10),
                f(s.median),
                f(s.q90)
            ));
        }
        out
    }
}

const PLOT_SCRIPT: &str = "\
# gnuplot -persist plot.gp
set datafile separator ','
set logscale xy
set key top left
set xlabel 'n'
set ylabel 'gamma-error squared'
plot 'errors.csv' using 1:3 with points pt 7 ps 0.4 lc rgb '#999999' title 'replicates', \\
     'means.csv' using 1:4:5 with yerrorlines lw 2 title 'mean +/- stderr'
";

/// Writes `errors.csv`, `means.csv`, `summary.json` and `plot.gp` into `dir`.
pub fn write_inconsistency_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    write_file(dir, "errors.csv", &result.errors_csv())?;
    write_file(dir, "means.csv", &result.means_csv())?;
    let json = serde_json::to_string_pretty(result).map_err(|e| crate::Error::Io(e.to_string()))?;
    write_file(dir, "summary.json", &json)?;
    write_file(dir, "plot.gp", PLOT_SCRIPT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{FStar, KernelSpec};

    fn config(gamma: f64, sigma: f64) -> ExperimentConfig {
        ExperimentConfig {
            kernel: KernelSpec::Cosine { beta: 2.0, zeta: 0.0, m: 256 },
            gamma,
            sigma,
            n_grid: vec![8, 16, 32],
            replicates: 6,
            lambda_grid: vec![1e-3],
            seed: 11,
            f_star: FStar::Zero,
            output_dir: "out".into(),
            embedding_alpha: None,
        }
    }

    #[test]
    fn reports_every_cell_and_a_slope() {
        let r = run_inconsistency_experiment(&config(0.5, 1.0)).unwrap();
        assert_eq!(r.replicates.len(), 18);
        assert!(r.per_n.iter().all(|s| s.successes == 6));
        assert!(r.fitted_slope.is_some());
        let theory = r.theory.unwrap();
        assert!((theory.exponent - 1.0).abs() < 1e-12);
        assert!(r.errors_csv().starts_with("n,replicate,gamma_error_sq\n8,0,"));
    }

    #[test]
    fn doubling_sigma_scales_errors_by_four() {
        let a = run_inconsistency_experiment(&config(0.25, 1.0)).unwrap();
        let b = run_inconsistency_experiment(&config(0.25, 2.0)).unwrap();
        for (ra, rb) in a.replicates.iter().zip(&b.replicates) {
            let (ea, eb) = (ra.gamma_error_sq.unwrap(), rb.gamma_error_sq.unwrap());
            assert!((eb / ea - 4.0).abs() < 1e-6, "{ea} {eb}");
        }
    }

    #[test]
    fn sphere_and_exact_families_run() {
        let mut cfg = config(0.0, 1.0);
        cfg.kernel = KernelSpec::ExactCosine { beta: 2.0 };
        let r = run_inconsistency_experiment(&cfg).unwrap();
        assert!(r.per_n.iter().all(|s| s.mean.is_some_and(|m| m > 0.0)));
        cfg.kernel = KernelSpec::Ntk { d: 2, k_max: 12 };
        cfg.f_star = FStar::SingleMode { b1: 1.0 };
        let r = run_inconsistency_experiment(&cfg).unwrap();
        assert!(r.per_n.iter().all(|s| s.successes + s.failures == 6));
    }

    #[test]
    fn slope_is_withheld_for_short_grids() {
        let mut cfg = config(0.5, 1.0);
        cfg.n_grid = vec![8, 16];
        let r = run_inconsistency_experiment(&cfg).unwrap();
        assert!(r.fitted_slope.is_none());
        assert!(r.slope_note.is_some());
    }
}
