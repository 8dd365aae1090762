//! Shared inputs for the benchmarks.

use kinterp::harness::sampling::{sample_sphere, sample_unit_interval};
use kinterp::rng::{stream, Purpose};

/// `n` uniform points on `[0, 1]`, fixed per `n`.
pub fn interval_points(n: usize) -> Vec<f64> {
    sample_unit_interval(n, &mut stream(7, n as u64, 0, Purpose::Inputs))
}

/// `n` uniform points on `S^d`, fixed per `(d, n)`.
pub fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    sample_sphere(d, n, &mut stream(7 + d as u64, n as u64, 0, Purpose::Inputs))
}

/// Standard Gaussian responses, fixed per `n`.
pub fn responses(n: usize) -> Vec<f64> {
    kinterp::harness::make_responses(n, kinterp::harness::FStar::Zero, 1.0, &mut stream(7, n as u64, 0, Purpose::Noise))
}
