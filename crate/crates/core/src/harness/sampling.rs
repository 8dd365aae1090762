use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::FStar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    UnitInterval,
    /// `S^d` inside `R^(d+1)`.
    Sphere(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    Interval(Vec<f64>),
    Sphere(Vec<Vec<f64>>),
}

impl Points {
    pub fn len(&self) -> usize {
        match self {
            Points::Interval(x) => x.len(),
            Points::Sphere(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Uniform draws on the domain. Sphere points are normalised Gaussian vectors.
pub fn sample_inputs<R: Rng>(domain: Domain, n: usize, rng: &mut R) -> Points {
    match domain {
        Domain::UnitInterval => Points::Interval(sample_unit_interval(n, rng)),
        Domain::Sphere(d) => Points::Sphere(sample_sphere(d, n, rng)),
    }
}

pub fn sample_unit_interval<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn sample_sphere<R: Rng>(d: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..=d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-8 {
                break v.into_iter().map(|a| a / norm).collect();
            }
        })
        .collect()
}

/// `y_i = f*(x_i) + sigma xi_i` with standard Gaussian `xi`. Every family used
/// here has the constant function as its first eigenfunction, so a single-mode
/// target is the constant `b1`.
pub fn make_responses<R: Rng>(n: usize, f_star: FStar, sigma: f64, rng: &mut R) -> Vec<f64> {
    let offset = match f_star {
        FStar::Zero => 0.0,
        FStar::SingleMode { b1 } => b1,
    };
    (0..n)
        .map(|_| offset + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::stats::mean_and_stderr;

    #[test]
    fn sphere_points_are_unit() {
        let mut rng = stream(1, 10, 0, Purpose::Inputs);
        for p in sample_sphere(3, 200, &mut rng) {
            let norm: f64 = p.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert_eq!(p.len(), 4);
        }
    }

    #[test]
    fn draws_are_deterministic() {
        let a = sample_inputs(Domain::UnitInterval, 50, &mut stream(3, 50, 2, Purpose::Inputs));
        let b = sample_inputs(Domain::UnitInterval, 50, &mut stream(3, 50, 2, Purpose::Inputs));
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_mean_is_one_half() {
        let x = sample_unit_interval(100_000, &mut stream(5, 0, 0, Purpose::Inputs));
        let (m, _) = mean_and_stderr(&x);
        assert!((m - 0.5).abs() < 0.005);
    }

    #[test]
    fn noise_has_requested_variance() {
        let sigma = 0.7;
        let y = make_responses(100_000, FStar::Zero, sigma, &mut stream(9, 0, 0, Purpose::Noise));
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.02);
        let tiny = make_responses(10, FStar::Zero, 1e-12, &mut stream(9, 0, 1, Purpose::Noise));
        assert!(tiny.iter().all(|v| v.abs() < 1e-10));
        let mode = make_responses(10, FStar::SingleMode { b1: 2.0 }, 1e-12, &mut stream(9, 0, 1, Purpose::Noise));
        assert!(mode.iter().all(|v| (v - 2.0).abs() < 1e-10));
    }
}
