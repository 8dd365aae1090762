//! Special functions and quadrature used across the crate.
//!
//! Everything here works on `f64` and is accurate to a few ulps in the regimes
//! the kernels need: Gauss-Legendre rules, the gamma function on the real line,
//! the Riemann zeta function for real arguments, and the polylogarithm
//! `Li_s(e^{i theta})` on the unit circle for real `s > 1`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if dp == 0.0 {
            dp = legendre_with_derivative(n, x).1;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss-Legendre rule mapped onto `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn on_interval(order: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(order);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GaussRule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|wi| wi * half).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on the real line (poles at non-positive integers return NaN).
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > 171.6 {
        return f64::INFINITY;
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// `sin(pi x)` with the argument reduced before scaling by pi, so the result
/// keeps full relative accuracy next to integers.
fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let v = (PI * r).sin();
    if (n as i64) % 2 == 0 {
        v
    } else {
        -v
    }
}

/// Riemann zeta function for real arguments. `zeta(1)` is `+inf`.
pub fn zeta(x: f64) -> f64 {
    if x == 1.0 {
        return f64::INFINITY;
    }
    if x < 0.0 {
        // trivial zeros
        if x == x.floor() && (x as i64) % 2 == 0 {
            return 0.0;
        }
        let s = 1.0 - x;
        return 2f64.powf(x) * PI.powf(x - 1.0) * sin_pi(0.5 * x) * gamma(s) * zeta(s);
    }
    if x > 60.0 {
        return 1.0 + 2f64.powf(-x) + 3f64.powf(-x);
    }
    // Borwein's accelerated alternating series for eta(x) = (1 - 2^{1-x}) zeta(x).
    const N: usize = 40;
    let d = borwein_coefficients::<N>();
    let mut eta = 0.0;
    for k in 0..N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (d[k] - d[N]) / ((k + 1) as f64).powf(x);
    }
    eta /= -d[N];
    eta / -((1.0 - x) * std::f64::consts::LN_2).exp_m1()
}

fn borwein_coefficients<const N: usize>() -> Vec<f64> {
    let n = N as f64;
    let mut d = Vec::with_capacity(N + 1);
    let mut term = 1.0 / n;
    let mut acc = term;
    d.push(n * acc);
    for i in 1..=N {
        let i_f = i as f64;
        // term_i = (n + i - 1)! 4^i / ((n - i)! (2i)!)
        term *= (n + i_f - 1.0) * 4.0 * (n - i_f + 1.0) / ((2.0 * i_f - 1.0) * (2.0 * i_f));
        acc += term;
        d.push(n * acc);
    }
    d
}

/// `Li_s(e^{i theta})` for real `s > 1`, returned as `(re, im)`.
///
/// Re is the cosine series `sum_k cos(k theta) / k^s`, Im the sine series.
/// Builds the expansion from scratch; use [`UnitCirclePolylog`] when the same
/// order is evaluated many times.
pub fn unit_circle_polylog(s: f64, theta: f64) -> (f64, f64) {
    UnitCirclePolylog::new(s).eval(theta)
}

const NEAR_INTEGER: f64 = 1e-3;
const NEAR_INTEGER_STEP: f64 = 2e-3;
const SERIES_TERMS: usize = 120;

/// `Li_s(e^{i theta})` at a fixed order with the series coefficients cached.
///
/// Uses the expansion of `Li_s(e^mu)` about `mu = 0` with `mu = i theta`,
/// valid on `|theta| < 2 pi` and applied after folding `theta` into `[0, pi]`.
/// Within `1e-3` of an integer the gamma and zeta poles nearly cancel, so the
/// value is interpolated through the integer order and four neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCirclePolylog {
    s: f64,
    zeta_s: f64,
    branches: Vec<(f64, SeriesAtOrder)>,
}

#[derive(Debug, Clone, PartialEq)]
struct SeriesAtOrder {
    // Li = sing(theta) + sum_j even[j] theta^(2j) + i theta sum_j odd[j] theta^(2j)
    even: Vec<f64>,
    odd: Vec<f64>,
    singular: Singular,
}

#[derive(Debug, Clone, PartialEq)]
enum Singular {
    // (i theta)^(n-1) / (n-1)! * (H_{n-1} - ln theta + i pi / 2)
    Integer { n: usize, harmonic: f64, inv_fact: f64 },
    // Gamma(1-s) theta^(s-1) e^{-i pi (s-1)/2}
    Fractional { amplitude: f64, phase: f64 },
}

impl SeriesAtOrder {
    fn new(s: f64) -> Self {
        let integer = s == s.floor();
        let mut even = Vec::with_capacity(SERIES_TERMS / 2 + 1);
        let mut odd = Vec::with_capacity(SERIES_TERMS / 2 + 1);
        let mut inv_fact = 1.0;
        for k in 0..SERIES_TERMS {
            if k > 0 {
                inv_fact /= k as f64;
            }
            let c = if integer && k + 1 == s as usize {
                0.0
            } else {
                zeta(s - k as f64) * inv_fact
            };
            // i^k parity signs
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                even.push(sign * c);
            } else {
                odd.push(sign * c);
            }
        }
        let singular = if integer {
            let n = s as usize;
            Singular::Integer {
                n,
                harmonic: (1..n).map(|j| 1.0 / j as f64).sum(),
                inv_fact: 1.0 / factorial(n - 1),
            }
        } else {
            Singular::Fractional {
                amplitude: gamma(1.0 - s),
                phase: -0.5 * PI * (s - 1.0),
            }
        };
        SeriesAtOrder { even, odd, singular }
    }

    fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        let t2 = t * t;
        let mut re = 0.0;
        for c in self.even.iter().rev() {
            re = re * t2 + c;
        }
        let mut im = 0.0;
        for c in self.odd.iter().rev() {
            im = im * t2 + c;
        }
        im *= t;
        match self.singular {
            Singular::Integer { n, harmonic, inv_fact } => {
                let mag = t.powi(n as i32 - 1) * inv_fact;
                let (pr, pi_) = i_power(n - 1);
                let (ar, ai) = (harmonic - t.ln(), 0.5 * PI);
                re += mag * (pr * ar - pi_ * ai);
                im += mag * (pr * ai + pi_ * ar);
            }
            Singular::Fractional { amplitude, phase } => {
                let mag = amplitude * t.powf(s - 1.0);
                re += mag * phase.cos();
                im += mag * phase.sin();
            }
        }
        (re, im)
    }
}

impl UnitCirclePolylog {
    pub fn new(s: f64) -> Self {
        assert!(s > 1.0, "unit circle polylog needs s > 1");
        let n = s.round();
        let near_integer = n >= 2.0 && (s - n).abs() < NEAR_INTEGER && s != n;
        let branches = if near_integer {
            (-2..=2)
                .map(|j| {
                    let node = if j == 0 { n } else { n + j as f64 * NEAR_INTEGER_STEP };
                    (node, SeriesAtOrder::new(node))
                })
                .collect()
        } else {
            vec![(s, SeriesAtOrder::new(s))]
        };
        UnitCirclePolylog {
            s,
            zeta_s: zeta(s),
            branches,
        }
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let two_pi = 2.0 * PI;
        let mut t = theta.rem_euclid(two_pi);
        let mut sign = 1.0;
        if t > PI {
            t = two_pi - t;
            sign = -1.0;
        }
        if t == 0.0 {
            return (self.zeta_s, 0.0);
        }
        let (re, im) = if self.branches.len() == 1 {
            let (node, series) = &self.branches[0];
            series.eval(*node, t)
        } else {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, (node_i, series)) in self.branches.iter().enumerate() {
                let w: f64 = self
                    .branches
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (node_j, _))| (self.s - node_j) / (node_i - node_j))
                    .product();
                let (r, m) = series.eval(*node_i, t);
                re += w * r;
                im += w * m;
            }
            (re, im)
        };
        (re, sign * im)
    }
}

fn i_power(k: usize) -> (f64, f64) {
    match k % 4 {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, -1.0),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `int_{u0}^{inf} e^{-p u} u^{-q} du` evaluated blockwise, stopping once a block
/// contributes less than `rel_tol` of the running total.
///
/// Returns `None` when the integral does not settle before `u_max` (the series
/// it bounds should be treated as divergent).
pub fn log_space_tail(p: f64, q: f64, u0: f64, rel_tol: f64, u_max: f64) -> Option<f64> {
    assert!(u0 > 0.0);
    if p <= 0.0 && !(p == 0.0 && q > 1.0) {
        return None;
    }
    let rule = GaussRule::on_interval(32, 0.0, 1.0);
    let integrand = |u: f64| (-p * u - q * u.ln()).exp();
    let mut total = 0.0;
    let mut start = u0;
    let mut width = 1.0f64.min(if p > 0.0 { 1.0 / p } else { 1.0 });
    let mut quiet_blocks = 0;
    while start < u_max {
        let block: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * width * integrand(start + t * width))
            .sum();
        if !block.is_finite() {
            return None;
        }
        total += block;
        if block <= rel_tol * total {
            quiet_blocks += 1;
            if quiet_blocks >= 2 {
                return Some(total);
            }
        } else {
            quiet_blocks = 0;
        }
        start += width;
        width *= 1.5;
    }
    None
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::on_interval(10, 0.0, 2.0);
        // degree 19 is the highest exact degree
        let exact = 2f64.powi(20) / 20.0;
        assert_relative_eq!(rule.integrate(|x| x.powi(19)), exact, max_relative = 1e-13);
        let (x, w) = gauss_legendre(7);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gamma_matches_known_values() {
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-13);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert!(gamma(-2.0).is_nan());
    }

    #[test]
    fn zeta_matches_known_values() {
        assert_relative_eq!(zeta(2.0), PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0), PI.powi(4) / 90.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(0.0), -0.5, max_relative = 1e-14);
        assert_relative_eq!(zeta(-1.0), -1.0 / 12.0, max_relative = 1e-13);
        assert_relative_eq!(zeta(-3.0), 1.0 / 120.0, max_relative = 1e-12);
        assert_eq!(zeta(-4.0), 0.0);
        // zeta(1/2) and zeta(3/2), mpmath reference values
        assert_relative_eq!(zeta(0.5), -1.460_354_508_809_586_8, max_relative = 1e-13);
        assert_relative_eq!(zeta(1.5), 2.612_375_348_685_488_3, max_relative = 1e-13);
    }

    fn direct_cosine_series(s: f64, theta: f64, terms: usize) -> f64 {
        (1..=terms).map(|k| (k as f64 * theta).cos() / (k as f64).powf(s)).sum()
    }

    #[test]
    fn polylog_even_order_matches_bernoulli_closed_form() {
        // sum cos(k t)/k^2 = pi^2/6 - pi t/2 + t^2/4 on [0, 2 pi]
        for &t in &[1e-9, 0.1, 1.0, 2.5, PI, 4.0, 6.0] {
            let (re, _) = unit_circle_polylog(2.0, t);
            let exact = PI * PI / 6.0 - PI * t / 2.0 + t * t / 4.0;
            assert_relative_eq!(re, exact, epsilon = 1e-14, max_relative = 1e-13);
        }
        // sum sin(k t)/k = (pi - t)/2 has no s > 1 analogue here; check s = 3 sine
        // series: sum sin(k t)/k^3 = pi^2 t/6 - pi t^2/4 + t^3/12
        for &t in &[0.2, 1.3, 3.0] {
            let (_, im) = unit_circle_polylog(3.0, t);
            let exact = PI * PI * t / 6.0 - PI * t * t / 4.0 + t.powi(3) / 12.0;
            assert_relative_eq!(im, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn polylog_fractional_order_matches_direct_summation() {
        for &s in &[2.5, 3.7, 4.5] {
            for &t in &[0.3, 1.7, 3.0, 5.1] {
                let (re, _) = unit_circle_polylog(s, t);
                let direct = direct_cosine_series(s, t, 200_000);
                assert_relative_eq!(re, direct, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn polylog_near_integer_order_is_continuous() {
        let t = 0.7;
        let at = unit_circle_polylog(3.0, t).0;
        let near = unit_circle_polylog(3.0 + 1e-6, t).0;
        assert!((at - near).abs() < 1e-5);
    }

    #[test]
    fn log_space_tail_matches_closed_form() {
        // q = 0: int_{u0}^inf e^{-p u} du = e^{-p u0}/p
        let v = log_space_tail(0.5, 0.0, 2.0, 1e-14, 1e7).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp() / 0.5, max_relative = 1e-9);
        assert!(log_space_tail(-0.1, 0.0, 2.0, 1e-6, 1e7).is_none());
        assert!(log_space_tail(0.0, 0.5, 2.0, 1e-6, 1e7).is_none());
    }
}
