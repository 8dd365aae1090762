use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, KernelSpec};
use super::kernel::{resolve_kernel, ExperimentKernel, KernelProfile};
use super::sampling::{sample_inputs, Points};
use super::{exceeds_failure_limit, fmt_value, write_file, Runtime};
use crate::error::{invalid, Error, Result};
use crate::kernels::dot_product::DotProductKernel;
use crate::kernels::spectral::SpectralKernel;
use crate::operators::{
    build_operator_model, v1_lambda, v2_lambda, v_lambda_coefficient_route, v_v1_gap_bound,
    GramVariance,
};
use crate::rng::{stream, Purpose};
use crate::spectra::{embedding_norm, EmbeddingSource};
use crate::stats::median;

const MONOTONE_TOL: f64 = 1e-10;

/// One point of a replicate's variance curve. `v_coeff` is NaN for kernels without an explicit basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub v_coeff: f64,
    pub v_gram: f64,
    pub v1: f64,
    pub v2: f64,
    pub envelope: f64,
}

impl LambdaRow {
    /// The coefficient route when available, the Gram route otherwise.
    pub fn v(&self) -> f64 {
        if self.v_coeff.is_finite() {
            self.v_coeff
        } else {
            self.v_gram
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReplicate {
    pub n: usize,
    pub replicate: usize,
    /// Empty when the replicate failed.
    pub rows: Vec<LambdaRow>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceNSummary {
    pub n: usize,
    pub successes: usize,
    pub failures: usize,
    /// Median over replicates of `|V - V_1| / V_1`, one entry per lambda.
    pub median_relative_gap: Vec<f64>,
    /// Median of `|V - V_1| / V_1` over every replicate and lambda.
    pub median_relative_gap_overall: f64,
    /// Fraction of (replicate, lambda) pairs with `|V - V_1|` under the gap bound.
    pub gap_bound_fraction: f64,
    /// Fraction of replicates whose `V` is non-increasing in lambda.
    pub monotone_fraction: f64,
    /// Largest `|V_coeff - V_gram| / V_gram`, when both routes ran.
    pub max_route_relative_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub config: ExperimentConfig,
    pub kernel: KernelProfile,
    pub embedding_alpha: f64,
    pub m_alpha: f64,
    /// `kappa` in the gap bound `kappa M_alpha^2 / (n lambda^(gamma + alpha))`.
    pub kappa: f64,
    pub per_n: Vec<VarianceNSummary>,
    pub failure_limit_exceeded: bool,
    pub replicates: Vec<VarianceReplicate>,
    pub runtime: Runtime,
}

fn envelope(profile: &KernelProfile, gamma: f64, lambda: f64, n: usize) -> f64 {
    match profile.beta {
        Some(beta) => lambda.powf(-gamma - 1.0 / beta) * (1.0 / lambda).ln().powf(-profile.zeta) / n as f64,
        None => f64::NAN,
    }
}

fn spectral_rows(
    k: &SpectralKernel,
    x: &[f64],
    cfg: &ExperimentConfig,
    profile: &KernelProfile,
) -> Result<Vec<LambdaRow>> {
    let n = x.len();
    let model = build_operator_model(k, x)?;
    let gram = GramVariance::new(k, x, cfg.gamma)?;
    cfg.lambda_grid
        .iter()
        .map(|&lambda| {
            Ok(LambdaRow {
                lambda,
                v_coeff: v_lambda_coefficient_route(&model, cfg.gamma, lambda)?,
                v_gram: gram.v(lambda)?,
                v1: v1_lambda(&model, cfg.gamma, lambda)?,
                v2: v2_lambda(k.spectrum(), cfg.gamma, lambda, n)?,
                envelope: envelope(profile, cfg.gamma, lambda, n),
            })
        })
        .collect()
}

// The addition formula makes sum over a degree of e^2 equal to N(d, k)
// pointwise, so V_1 and V_2 coincide on spheres.
fn sphere_rows(
    k: &DotProductKernel,
    x: &[Vec<f64>],
    cfg: &ExperimentConfig,
    profile: &KernelProfile,
) -> Result<Vec<LambdaRow>> {
    let n = x.len();
    let gram = GramVariance::new(k, x, cfg.gamma)?;
    let spectrum = k.spectrum();
    cfg.lambda_grid
        .iter()
        .map(|&lambda| {
            let v2 = spectrum
                .coefficients()
                .iter()
                .zip(spectrum.multiplicities())
                .filter(|(a, _)| **a > 0.0)
                .map(|(a, m)| m * a.powf(2.0 - cfg.gamma) / (a + lambda).powi(2))
                .sum::<f64>()
                / n as f64;
            Ok(LambdaRow {
                lambda,
                v_coeff: f64::NAN,
                v_gram: gram.v(lambda)?,
                v1: v2,
                v2,
                envelope: envelope(profile, cfg.gamma, lambda, n),
            })
        })
        .collect()
}

fn is_monotone(rows: &[LambdaRow]) -> bool {
    let mut sorted: Vec<&LambdaRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    sorted
        .windows(2)
        .all(|w| w[1].v() <= w[0].v() + MONOTONE_TOL * w[0].v().abs())
}

fn summarise(
    n: usize,
    reps: &[&VarianceReplicate],
    cfg: &ExperimentConfig,
    m_alpha: f64,
    alpha: f64,
    kappa: f64,
) -> VarianceNSummary {
    let ok: Vec<&VarianceReplicate> = reps.iter().copied().filter(|r| r.error.is_none()).collect();
    let rel_gap = |row: &LambdaRow| (row.v() - row.v1).abs() / row.v1;
    let median_relative_gap: Vec<f64> = (0..cfg.lambda_grid.len())
        .map(|i| median(&ok.iter().map(|r| rel_gap(&r.rows[i])).collect::<Vec<_>>()))
        .collect();
    let all_gaps: Vec<f64> = ok.iter().flat_map(|r| r.rows.iter().map(rel_gap)).collect();
    let pairs = all_gaps.len().max(1) as f64;
    let within = ok
        .iter()
        .flat_map(|r| r.rows.iter())
        .filter(|row| (row.v() - row.v1).abs() <= v_v1_gap_bound(m_alpha, n, cfg.gamma, alpha, row.lambda, kappa))
        .count();
    let monotone = ok.iter().filter(|r| is_monotone(&r.rows)).count();
    let route_diffs: Vec<f64> = ok
        .iter()
        .flat_map(|r| r.rows.iter())
        .filter(|row| row.v_coeff.is_finite())
        .map(|row| (row.v_coeff - row.v_gram).abs() / row.v_gram)
        .collect();
    VarianceNSummary {
        n,
        successes: ok.len(),
        failures: reps.len() - ok.len(),
        median_relative_gap,
        median_relative_gap_overall: median(&all_gaps),
        gap_bound_fraction: within as f64 / pairs,
        monotone_fraction: monotone as f64 / ok.len().max(1) as f64,
        max_route_relative_difference: route_diffs.into_iter().reduce(f64::max),
    }
}

/// Variance curves for `replicates` fresh designs at every `n`.
///
/// Spectral families report both routes for `V`; sphere families report the
/// Gram route only. The untruncated cosine kernel has no closed form for `V_1`
/// and is rejected.
pub fn run_variance_experiment(cfg: &ExperimentConfig) -> Result<VarianceReport> {
    cfg.validate()?;
    if matches!(cfg.kernel, KernelSpec::ExactCosine { .. }) {
        return Err(Error::Config(
            "variance experiment needs a truncated or sphere kernel; use family \"cosine\"".into(),
        ));
    }
    if cfg.lambda_grid.is_empty() {
        return Err(Error::Config("lambda_grid must be non-empty".into()));
    }
    if cfg.lambda_grid.iter().any(|&l| l >= 0.5) {
        warn!("lambda >= 1/2 is outside the range where V_1 and V_2 are comparable");
    }
    let start = Instant::now();
    let (kernel, profile) = resolve_kernel(&cfg.kernel)?;
    let alpha = cfg
        .embedding_alpha
        .unwrap_or_else(|| profile.beta.map_or(1.0, |b| (1.0 / b + 0.05).min(1.0)));
    let m_alpha = match &kernel {
        ExperimentKernel::Spectral(k) => embedding_norm(EmbeddingSource::Spectral(k), alpha, None)?.m_alpha,
        ExperimentKernel::Sphere(k) => embedding_norm(EmbeddingSource::DotProduct(k.spectrum()), alpha, None)?.m_alpha,
        ExperimentKernel::Exact(_) => unreachable!("rejected above"),
    };
    let kappa = 1.0;

    let cells: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r)))
        .collect();
    let replicates: Vec<VarianceReplicate> = cells
        .par_iter()
        .map(|&(n, r)| {
            let x = sample_inputs(profile.domain, n, &mut stream(cfg.seed, n as u64, r as u64, Purpose::Inputs));
            let rows = match (&kernel, &x) {
                (ExperimentKernel::Spectral(k), Points::Interval(x)) => spectral_rows(k, x, cfg, &profile),
                (ExperimentKernel::Sphere(k), Points::Sphere(x)) => sphere_rows(k, x, cfg, &profile),
                _ => Err(invalid("sampled points do not match the kernel domain")),
            };
            match rows {
                Ok(rows) => VarianceReplicate { n, replicate: r, rows, error: None },
                Err(e) => {
                    warn!("n = {n}, replicate {r}: {e}");
                    VarianceReplicate { n, replicate: r, rows: vec![], error: Some(e.to_string()) }
                }
            }
        })
        .collect();

    let per_n: Vec<VarianceNSummary> = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let reps: Vec<&VarianceReplicate> = replicates.iter().filter(|r| r.n == n).collect();
            summarise(n, &reps, cfg, m_alpha, alpha, kappa)
        })
        .collect();
    let failure_limit_exceeded = per_n
        .iter()
        .any(|s| exceeds_failure_limit(s.failures, cfg.replicates));
    info!("variance experiment finished in {:.2}s", start.elapsed().as_secs_f64());
    Ok(VarianceReport {
        config: cfg.clone(),
        kernel: profile,
        embedding_alpha: alpha,
        m_alpha,
        kappa,
        per_n,
        failure_limit_exceeded,
        replicates,
        runtime: Runtime {
            seconds: start.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        },
    })
}

const CURVE_HEADER: &str = "lambda,v_coeff,v_gram,v1,v2,envelope\n";

impl VarianceReport {
    /// Per-lambda means over the successful replicates at sample size `n`.
    pub fn curve_csv(&self, n: usize) -> String {
        let ok: Vec<&VarianceReplicate> = self
            .replicates
            .iter()
            .filter(|r| r.n == n && r.error.is_none())
            .collect();
        let mut out = String::from(CURVE_HEADER);
        for (i, &lambda) in self.config.lambda_grid.iter().enumerate() {
            let mean = |f: fn(&LambdaRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(&r.rows[i])).sum::<f64>() / ok.len() as f64
                }
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_value(lambda),
                fmt_value(mean(|r| r.v_coeff)),
                fmt_value(mean(|r| r.v_gram)),
                fmt_value(mean(|r| r.v1)),
                fmt_value(mean(|r| r.v2)),
                fmt_value(mean(|r| r.envelope)),
            ));
        }
        out
    }

    /// Every replicate's curve in long format.
    pub fn replicates_csv(&self) -> String {
        let mut out = String::from("n,replicate,lambda,v_coeff,v_gram,v1,v2,envelope\n");
        for r in &self.replicates {
            for row in &r.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n,
                    r.replicate,
                    fmt_value(row.lambda),
                    fmt_value(row.v_coeff),
                    fmt_value(row.v_gram),
                    fmt_value(row.v1),
                    fmt_value(row.v2),
                    fmt_value(row.envelope)
                ));
            }
        }
        out
    }
}

const PLOT_SCRIPT: &str = "\
# gnuplot -persist plot.gp
set datafile separator ','
set logscale xy
set xlabel 'lambda'
set ylabel 'variance term'
plot 'curve.csv' using 1:3 with linespoints title 'V (Gram route)', \\
     'curve.csv' using 1:2 with lines dt 2 title 'V (coefficients)', \\
     'curve.csv' using 1:4 with lines title 'V_1', \\
     'curve.csv' using 1:5 with lines title 'V_2', \\
     'curve.csv' using 1:6 with lines dt 3 title 'rate envelope'
";

/// Writes `curve.csv` (largest `n`), `curve_n<n>.csv`, `replicates.csv`,
/// `summary.json` and `plot.gp` into `dir`.
pub fn write_variance_outputs(report: &VarianceReport, dir: &Path) -> Result<()> {
    let largest = *report.config.n_grid.last().expect("validated n_grid");
    write_file(dir, "curve.csv", &report.curve_csv(largest))?;
    for &n in &report.config.n_grid {
        write_file(dir, &format!("curve_n{n}.csv"), &report.curve_csv(n))?;
    }
    write_file(dir, "replicates.csv", &report.replicates_csv())?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    write_file(dir, "summary.json", &json)?;
    write_file(dir, "plot.gp", PLOT_SCRIPT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::FStar;
    use crate::spectra::geometric_grid;

    fn config(n_grid: Vec<usize>, replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            kernel: KernelSpec::Cosine { beta: 2.0, zeta: 0.0, m: 400 },
            gamma: 0.25,
            sigma: 1.0,
            n_grid,
            replicates,
            lambda_grid: geometric_grid(1e-3, 0.25, 6),
            seed: 5,
            f_star: FStar::Zero,
            output_dir: "out".into(),
            embedding_alpha: None,
        }
    }

    #[test]
    fn curves_are_monotone_and_routes_agree() {
        let r = run_variance_experiment(&config(vec![16, 32], 4)).unwrap();
        for s in &r.per_n {
            assert_eq!(s.successes, 4);
            assert_eq!(s.monotone_fraction, 1.0);
            assert!(s.max_route_relative_difference.unwrap() < 1e-6);
        }
        assert!(r.curve_csv(32).starts_with(CURVE_HEADER));
        assert_eq!(r.replicates_csv().lines().count(), 1 + 2 * 4 * 6);
    }

    #[test]
    fn relative_gap_shrinks_with_n() {
        let r = run_variance_experiment(&config(vec![64, 128, 256], 12)).unwrap();
        let gaps: Vec<f64> = r.per_n.iter().map(|s| s.median_relative_gap_overall).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn sphere_kernels_use_the_gram_route() {
        let mut cfg = config(vec![10, 20], 2);
        cfg.kernel = KernelSpec::Ntk { d: 2, k_max: 10 };
        let r = run_variance_experiment(&cfg).unwrap();
        let row = r.replicates[0].rows[0];
        assert!(row.v_coeff.is_nan() && row.v_gram > 0.0);
        assert_eq!(row.v1, row.v2);
    }

    #[test]
    fn exact_kernel_is_a_config_error() {
        let mut cfg = config(vec![10], 1);
        cfg.kernel = KernelSpec::ExactCosine { beta: 2.0 };
        assert!(matches!(run_variance_experiment(&cfg), Err(Error::Config(_))));
    }
}
