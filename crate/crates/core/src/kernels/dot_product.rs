//! Dot-product kernels on the sphere `S^d` in `R^(d+1)`.
//!
//! `K(x, x') = sum_k a_k N(d,k) P_k(<x, x'>)` where `N(d,k)` counts degree-`k`
//! spherical harmonics and `P_k` is the Gegenbauer polynomial with parameter
//! `(d-1)/2`, scaled so that `P_k(1) = 1`.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{Kernel, PowerKernel};
use crate::error::{invalid, Error, Result};
use crate::special::GaussRule;
use crate::stats::{fit_loglog_slope, LogLogFit};

/// Rounding slack allowed on `|t| <= 1` before NTK inputs are rejected.
pub const NTK_CLAMP: f64 = 1e-12;
/// Relative change between quadrature orders accepted as converged.
pub const PROJECTION_TOLERANCE: f64 = 1e-6;
const MAX_QUAD_ORDER: usize = 1 << 15;
// coefficients this far below the largest are compared in absolute terms
const COMPARISON_FLOOR: f64 = 1e-8;
const UNIT_NORM_TOLERANCE: f64 = 1e-9;

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `N(d, k) = C(k+d, k) - C(k-2+d, k-2)`, the second term dropped for `k < 2`.
pub fn multiplicity(d: usize, k: usize) -> f64 {
    let lead = binomial(k + d, k);
    if k < 2 {
        lead
    } else {
        (lead - binomial(k - 2 + d, k - 2)).round()
    }
}

/// Fills `out[0..=k_max]` with `P_0(t), ..., P_{k_max}(t)`.
///
/// Uses the three-term recurrence for `C_k^nu` rewritten for `P_k = C_k / C_k(1)`:
/// `(k + 2nu) P_{k+1} = 2(k + nu) t P_k - k P_{k-1}`. At `nu = 0` (the circle)
/// this is the Chebyshev recurrence, and `P_1 = t` is seeded directly.
fn gegenbauer_all(k_max: usize, d: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if k_max == 0 {
        return;
    }
    out.push(t);
    let nu = (d as f64 - 1.0) / 2.0;
    for k in 1..k_max {
        let kf = k as f64;
        let next = (2.0 * (kf + nu) * t * out[k] - kf * out[k - 1]) / (kf + 2.0 * nu);
        out.push(next);
    }
}

/// Degree-`k` Gegenbauer polynomial for `S^d`, normalised to `P_k(1) = 1`.
pub fn gegenbauer_p(k: usize, d: usize, t: f64) -> Result<f64> {
    check_dimension(d)?;
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain {
            point: format!("{t}"),
            domain: "[-1, 1]",
        });
    }
    let mut buf = Vec::with_capacity(k + 1);
    gegenbauer_all(k, d, t, &mut buf);
    Ok(buf[k])
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("sphere dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// Per-degree eigenvalues `a_0..a_{K_max}` of a dot-product kernel on `S^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum")]
pub struct DotProductSpectrum {
    d: usize,
    a: Vec<f64>,
    #[serde(rename = "N")]
    multiplicities: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSpectrum {
    d: usize,
    a: Vec<f64>,
    #[serde(rename = "N", default)]
    multiplicities: Option<Vec<f64>>,
}

impl TryFrom<RawSpectrum> for DotProductSpectrum {
    type Error = Error;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        let s = DotProductSpectrum::new(raw.d, raw.a)?;
        if let Some(given) = raw.multiplicities {
            if given != s.multiplicities {
                return Err(invalid("stored multiplicities disagree with N(d,k)"));
            }
        }
        Ok(s)
    }
}

impl DotProductSpectrum {
    pub fn new(d: usize, a: Vec<f64>) -> Result<Self> {
        check_dimension(d)?;
        if a.is_empty() {
            return Err(invalid("need at least one coefficient"));
        }
        if let Some((k, v)) = a.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("a_{k} = {v} is not a finite non-negative number")));
        }
        let multiplicities = (0..a.len()).map(|k| multiplicity(d, k)).collect();
        Ok(DotProductSpectrum { d, a, multiplicities })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    pub fn k_max(&self) -> usize {
        self.a.len() - 1
    }

    /// `K(1) = sum_k a_k N(d,k)`.
    pub fn trace(&self) -> f64 {
        self.a.iter().zip(&self.multiplicities).map(|(a, n)| a * n).sum()
    }

    /// Log-log slope of the positive `a_k` over `k` in `[k_lo, k_hi]`.
    ///
    /// Zero coefficients are skipped: the NTK, for instance, has vanishing odd
    /// degrees beyond the first, and only its even degrees carry the decay.
    pub fn decay_slope(&self, k_lo: usize, k_hi: usize) -> Result<LogLogFit> {
        let floor = 1e-14 * self.a.iter().cloned().fold(0.0, f64::max);
        let (ks, vals): (Vec<f64>, Vec<f64>) = (k_lo.max(1)..=k_hi.min(self.k_max()))
            .filter(|&k| self.a[k] > floor)
            .map(|k| (k as f64, self.a[k]))
            .unzip();
        fit_loglog_slope(&ks, &vals)
    }

    /// Decay fit over the upper three quarters of the available degrees.
    pub fn fitted_decay_exponent(&self) -> Option<LogLogFit> {
        let k_max = self.k_max();
        if k_max < 8 {
            return None;
        }
        self.decay_slope((k_max / 4).max(2), k_max).ok()
    }

    fn eval_power(&self, s: f64, t: f64) -> f64 {
        let mut p = Vec::with_capacity(self.a.len());
        gegenbauer_all(self.k_max(), self.d, t, &mut p);
        self.a
            .iter()
            .zip(&self.multiplicities)
            .zip(&p)
            .filter(|((a, _), _)| **a > 0.0)
            .map(|((a, n), pk)| a.powf(s) * n * pk)
            .sum()
    }
}

/// `sum_k a_k N(d,k) P_k(t)`.
pub fn dot_product_kernel_eval(s: &DotProductSpectrum, t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0) {
        return Err(Error::Domain {
            point: format!("{t}"),
            domain: "[-1, 1]",
        });
    }
    Ok(s.eval_power(1.0, t))
}

fn ntk_unchecked(t: f64) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    (2.0 / PI) * t * (PI - t.acos()) + (1.0 - t * t).sqrt() / PI
}

/// Shallow ReLU neural tangent kernel profile.
pub fn ntk_eval(t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + NTK_CLAMP) {
        return Err(Error::Domain {
            point: format!("{t}"),
            domain: "[-1, 1]",
        });
    }
    Ok(ntk_unchecked(t))
}

/// Recovers `a_k = int g P_k w / int w` with `w(t) = (1 - t^2)^(d/2 - 1)`.
///
/// Substituting `t = cos(theta)` turns the weight into `sin^(d-1)(theta)` on
/// `[0, pi]`, which Gauss-Legendre handles without endpoint singularities. The
/// order starts at `quad_order` and doubles until no coefficient moves by
/// more than the relative tolerance.
pub fn project_dot_product_spectrum(
    g: impl Fn(f64) -> f64,
    d: usize,
    k_max: usize,
    quad_order: usize,
) -> Result<DotProductSpectrum> {
    check_dimension(d)?;
    if quad_order < k_max + 1 {
        return Err(invalid(format!(
            "quad_order {quad_order} cannot resolve degree {k_max}"
        )));
    }
    let mut order = quad_order;
    let mut prev = project_at_order(&g, d, k_max, order);
    loop {
        order *= 2;
        let next = project_at_order(&g, d, k_max, order);
        let scale = next.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let change = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs() / (a.abs() + COMPARISON_FLOOR * scale).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if change <= PROJECTION_TOLERANCE {
            return finish_projection(d, next);
        }
        if order >= MAX_QUAD_ORDER {
            return Err(Error::QuadratureNotConverged { change, order });
        }
        prev = next;
    }
}

fn project_at_order(g: &impl Fn(f64) -> f64, d: usize, k_max: usize, order: usize) -> Vec<f64> {
    let rule = GaussRule::on_interval(order, 0.0, PI);
    let mut acc = vec![0.0; k_max + 1];
    let mut mass = 0.0;
    let mut p = Vec::with_capacity(k_max + 1);
    for (&theta, &w) in rule.nodes.iter().zip(&rule.weights) {
        let t = theta.cos();
        let wt = w * theta.sin().powi(d as i32 - 1);
        mass += wt;
        let gw = g(t) * wt;
        gegenbauer_all(k_max, d, t, &mut p);
        for (a, pk) in acc.iter_mut().zip(&p) {
            *a += gw * pk;
        }
    }
    acc.iter().map(|a| a / mass).collect()
}

fn finish_projection(d: usize, mut a: Vec<f64>) -> Result<DotProductSpectrum> {
    for (k, v) in a.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -1e-10 {
                warn!("projected a_{k} = {v:e} is negative; clamping to 0");
            }
            *v = 0.0;
        }
    }
    DotProductSpectrum::new(d, a)
}

/// CSV `t,K(t)` on `points` equispaced values of `t` in `[-1, 1]`.
pub fn profile_csv(g: impl Fn(f64) -> f64, points: usize) -> String {
    let mut out = String::from("t,K(t)\n");
    let points = points.max(2);
    for j in 0..points {
        let t = -1.0 + 2.0 * j as f64 / (points - 1) as f64;
        out.push_str(&format!("{t},{}\n", g(t)));
    }
    out
}

fn check_sphere_point(d: usize, x: &[f64]) -> Result<()> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if x.len() != d + 1 || (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return Err(Error::Domain {
            point: format!("{x:?}"),
            domain: "unit sphere",
        });
    }
    Ok(())
}

fn inner(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
}

/// A dot-product kernel given by its degree spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotProductKernel {
    spectrum: DotProductSpectrum,
}

impl DotProductKernel {
    pub fn new(spectrum: DotProductSpectrum) -> Self {
        DotProductKernel { spectrum }
    }

    pub fn spectrum(&self) -> &DotProductSpectrum {
        &self.spectrum
    }
}

impl Kernel for DotProductKernel {
    type Point = Vec<f64>;

    fn check_point(&self, x: &Vec<f64>) -> Result<()> {
        check_sphere_point(self.spectrum.d, x)
    }

    fn eval_unchecked(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        self.spectrum.eval_power(1.0, inner(x, y))
    }
}

impl PowerKernel for DotProductKernel {
    fn eval_power_unchecked(&self, s: f64, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        self.spectrum.eval_power(s, inner(x, y))
    }
}

/// The NTK in closed form on `S^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NtkKernel {
    d: usize,
}

impl NtkKernel {
    pub fn new(d: usize) -> Result<Self> {
        check_dimension(d)?;
        Ok(NtkKernel { d })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Degree spectrum up to `k_max`.
    pub fn spectrum(&self, k_max: usize) -> Result<DotProductSpectrum> {
        project_dot_product_spectrum(ntk_unchecked, self.d, k_max, 2 * k_max + 2)
    }
}

impl Kernel for NtkKernel {
    type Point = Vec<f64>;

    fn check_point(&self, x: &Vec<f64>) -> Result<()> {
        check_sphere_point(self.d, x)
    }

    fn eval_unchecked(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        ntk_unchecked(inner(x, y))
    }
}
