use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use kinterp::harness::{
    run_inconsistency_experiment, run_variance_experiment, write_inconsistency_outputs,
    write_variance_outputs, ExperimentConfig,
};
use kinterp::Error;
use log::info;

#[derive(Parser)]
#[command(name = "kinterp", version, about = "Variance and inconsistency experiments for kernel interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance curves V(lambda), V_1, V_2 across sample sizes.
    Variance(RunArgs),
    /// Growth of the interpolant's gamma-error with n.
    Inconsistency(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_FAILURES: u8 = 3;

fn load(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    let (args, variance) = match &command {
        Command::Variance(a) => (a, true),
        Command::Inconsistency(a) => (a, false),
    };
    let cfg = match load(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build_global()
        .context("building thread pool")?;

    let outcome = if variance {
        run_variance_experiment(&cfg).and_then(|r| {
            write_variance_outputs(&r, &cfg.output_dir)?;
            for s in &r.per_n {
                println!(
                    "n = {:>5}  ok {:>3}  median |V-V1|/V1 {:.3e}  within gap bound {:.3}",
                    s.n, s.successes, s.median_relative_gap_overall, s.gap_bound_fraction
                );
            }
            Ok(r.failure_limit_exceeded)
        })
    } else {
        run_inconsistency_experiment(&cfg).and_then(|r| {
            write_inconsistency_outputs(&r, &cfg.output_dir)?;
            for s in &r.per_n {
                println!(
                    "n = {:>5}  ok {:>3}  mean {:.4e}  stderr {:.2e}",
                    s.n,
                    s.successes,
                    s.mean.unwrap_or(f64::NAN),
                    s.stderr.unwrap_or(f64::NAN)
                );
            }
            match (r.fitted_slope, r.theory) {
                (Some(fit), Some(t)) => println!(
                    "slope {:.3} +/- {:.3}  (predicted exponent {:.3}, {:?})",
                    fit.slope, fit.stderr, t.exponent, t.classification
                ),
                (Some(fit), None) => println!("slope {:.3} +/- {:.3}", fit.slope, fit.stderr),
                (None, _) => println!("no slope: {}", r.slope_note.as_deref().unwrap_or("unavailable")),
            }
            Ok(r.failure_limit_exceeded)
        })
    };
    match outcome {
        Ok(exceeded) => {
            info!("outputs in {}", cfg.output_dir.display());
            if exceeded {
                eprintln!("more than 20% of replicates failed at some n");
                Ok(ExitCode::from(EXIT_FAILURES))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Err(Error::Config(msg)) => {
            eprintln!("error: configuration error: {msg}");
            Ok(ExitCode::from(EXIT_CONFIG))
        }
        Err(e) => Err(e.into()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
