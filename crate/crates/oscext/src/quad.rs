//! Adaptive quadrature with an embedded Gauss-Legendre error rule.
//!
//! Every integral in this crate goes through [`integrate`], which splits the
//! worst interval first and accepts once the summed error estimate drops
//! below `max(abs_tol, rel_tol * |value|)`. The local estimate pairs a
//! 7-point with a 15-point Gauss-Legendre rule; both node sets are computed
//! at startup by Newton iteration on the Legendre recurrence, so there are
//! no hardcoded node tables to mistype.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Tolerances and budgets shared by the quadrature-backed operations.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Relative error target for integral values.
    pub rel_tol: f64,
    /// Absolute error floor, also the target for certified improper tails.
    pub abs_tol: f64,
    /// Maximum number of interval subdivisions before giving up.
    pub max_subdivisions: usize,
    /// Safety factor pushing improper-integral cutoffs further out: the
    /// analytic tail bound must be below `abs_tol / cutoff_margin`.
    pub cutoff_margin: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 512,
            cutoff_margin: 10.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidArgument(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        if !(self.cutoff_margin > 0.0) {
            return Err(Error::InvalidArgument(
                "cutoff_margin must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Value and certified error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        // Chebyshev-style initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rules() -> &'static ((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)) {
    static RULES: OnceLock<((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>))> = OnceLock::new();
    RULES.get_or_init(|| (legendre_rule(7), legendre_rule(15)))
}

fn fixed_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in rule.0.iter().zip(rule.1.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let (low, high) = rules();
    let v7 = fixed_rule(f, a, b, low);
    let v15 = fixed_rule(f, a, b, high);
    Segment {
        a,
        b,
        value: v15,
        error: (v15 - v7).abs(),
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadOutcome> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(QuadOutcome {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut heap = BinaryHeap::new();
    let first = eval_segment(&f, lo, hi);
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);

    let mut splits = 0usize;
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if splits >= cfg.max_subdivisions {
            return Err(Error::QuadratureFailure(format!(
                "error estimate {:.3e} above target after {} subdivisions",
                total_err, splits
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty while error is positive");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure(
                "interval too small to subdivide further".into(),
            ));
        }
        let left = eval_segment(&f, worst.a, mid);
        let right = eval_segment(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }

    if !total.is_finite() {
        return Err(Error::Overflow("integral value is not finite".into()));
    }
    Ok(QuadOutcome {
        value: sign * total,
        error_estimate: total_err,
        subdivisions: splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn node_weights_sum_to_two() {
        for n in [7usize, 15] {
            let (nodes, weights) = legendre_rule(n);
            assert_eq!(nodes.len(), n);
            let s: f64 = weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-14);
            // nodes are symmetric about the origin
            for (x, y) in nodes.iter().zip(nodes.iter().rev()) {
                assert_relative_eq!(*x, -*y, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn seven_point_rule_is_exact_to_degree_13() {
        let (rule7, _) = rules();
        // x^12 over [-1, 1] = 2/13, x^13 integrates to zero
        let v = fixed_rule(&|x: f64| x.powi(12), -1.0, 1.0, rule7);
        assert_relative_eq!(v, 2.0 / 13.0, epsilon = 1e-13);
        let v = fixed_rule(&|x: f64| x.powi(13), -1.0, 1.0, rule7);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn adaptive_gaussian_integral() {
        let cfg = QuadratureConfig::default();
        let out = integrate(|s: f64| (-s * s).exp(), 0.0, 12.0, &cfg).unwrap();
        assert_relative_eq!(out.value, std::f64::consts::PI.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_handles_flat_then_decaying_integrand() {
        let cfg = QuadratureConfig::default();
        let out = integrate(|s: f64| 1.0 / (s * s).cosh().powi(2), 0.0, 10.0, &cfg).unwrap();
        assert!(out.value > 0.8 && out.value < 1.2, "value {}", out.value);
        assert!(out.error_estimate <= 1e-10 * out.value.abs() + 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let cfg = QuadratureConfig::default();
        let a = integrate(|x| x * x, 0.0, 1.0, &cfg).unwrap().value;
        let b = integrate(|x| x * x, 1.0, 0.0, &cfg).unwrap().value;
        assert_relative_eq!(a, -b, epsilon = 1e-14);
        assert_relative_eq!(a, 1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn subdivision_budget_is_enforced() {
        let cfg = QuadratureConfig {
            max_subdivisions: 2,
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            ..Default::default()
        };
        let r = integrate(|s: f64| (50.0 * s).sin().abs(), 0.0, 10.0, &cfg);
        assert!(matches!(r, Err(Error::QuadratureFailure(_))));
    }
}
