//! The even power-series solution of the negative-energy oscillator equation.
//!
//! For a frequency parameter `ω ≥ 0` the initial value problem
//!
//! ```text
//! -u''/2 + t²u/2 = -ω²u,    u(0) = 1,  u'(0) = 0
//! ```
//!
//! has an even entire solution `u(t, ω) = Σ a_{2n}(ω) t^{2n}` whose
//! coefficients obey
//!
//! ```text
//! a_0 = 1,  a_2 = ω²,
//! a_{2n+2} = (2ω² a_{2n} + a_{2n-2}) / ((2n+2)(2n+1)).
//! ```
//!
//! Since `ω²/(2n+1) + n/(2(2n+1)) < 1` for all `n ≥ n₀` with
//! `n₀ = min{n : 2ω² < 3n + 2}`, induction gives the factorial envelope
//! `a_{2n} ≤ q/n!` with `q = max{1, 2·a_2, n!·a_{2n} for n ≤ n₀}`, hence
//! `u(t, ω) ≤ q·exp(t²)` and a certified truncation bound for every partial
//! sum. The companion solution `v(t, ω) = u(t, ω)·∫_t^∞ u(s, ω)^{-2} ds`
//! decays at `+∞`, satisfies `v(0, ω) = G(ω)` and `v'(0, ω) = -1`, and is the
//! source of all negative-eigenvalue conditions downstream.
//!
//! `q` can exceed the f64 range for large `ω` (it grows like `exp(ω²/2)`),
//! so the envelope constant is carried in log form internally.

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

/// Largest supported frequency parameter. Above this the solution values
/// needed by the decay integral overflow double precision.
pub const OMEGA_MAX: f64 = 64.0;

/// Even-coefficient expansion of `u(t, ω)` with a certified tail envelope.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    omega: f64,
    /// `coeffs[n] = a_{2n}(ω)`; odd-order coefficients vanish identically.
    coeffs: Vec<f64>,
    /// `ln coeffs[n]`, for term evaluation once `t^{2n}` alone would
    /// overflow even though the term itself is moderate.
    ln_coeffs: Vec<f64>,
    /// Natural log of the envelope constant `q(ω)`.
    ln_q: f64,
    /// Index from which the factorial envelope is certified by induction.
    n0: usize,
}

impl SeriesSolution {
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Stored even coefficients `a_0, a_2, a_4, ...`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Envelope constant `q(ω)`. May round to infinity for `ω ≳ 38`; use
    /// [`SeriesSolution::ln_q_bound`] where the magnitude matters.
    pub fn q_bound(&self) -> f64 {
        self.ln_q.exp()
    }

    pub fn ln_q_bound(&self) -> f64 {
        self.ln_q
    }

    pub fn n0(&self) -> usize {
        self.n0
    }
}

/// Smallest index from which the envelope induction closes:
/// `ω²/(2n+1) + n/(2(2n+1)) < 1  ⇔  2ω² < 3n + 2`, upward closed in `n`.
fn envelope_start(omega: f64) -> usize {
    let mut n = 1usize;
    while 2.0 * omega * omega >= 3.0 * n as f64 + 2.0 {
        n += 1;
    }
    n
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Build the expansion of `u(·, ω)` with `n_terms` stored even coefficients.
pub fn build_series(omega: f64, n_terms: usize) -> Result<SeriesSolution> {
    if !omega.is_finite() || omega < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "omega must be a nonnegative real, got {omega}"
        )));
    }
    if omega > OMEGA_MAX {
        return Err(Error::OutOfRange(format!(
            "omega = {omega} exceeds the supported range [0, {OMEGA_MAX}]"
        )));
    }
    if n_terms < 3 {
        return Err(Error::InvalidArgument(format!(
            "n_terms must be at least 3, got {n_terms}"
        )));
    }
    let n0 = envelope_start(omega);
    if n_terms - 1 < n0 {
        return Err(Error::SeriesBudget(format!(
            "n_terms = {n_terms} stores a_0..a_{}, too few to certify the envelope start n0 = {n0}",
            2 * (n_terms - 1)
        )));
    }

    let w2 = omega * omega;
    let mut coeffs = vec![0.0; n_terms];
    coeffs[0] = 1.0;
    coeffs[1] = w2;
    for k in 1..n_terms - 1 {
        let den = ((2 * k + 2) * (2 * k + 1)) as f64;
        coeffs[k + 1] = (2.0 * w2 * coeffs[k] + coeffs[k - 1]) / den;
    }

    // ln q = ln max{1, 2 a_2, n! a_{2n} for 1 <= n <= n0}, with the scaled
    // products b_n = n! a_{2n} advanced in log form:
    //   b_{n+1} = (2ω² b_n + n b_{n-1}) / (2(2n+1)).
    let mut ln_q = 0.0f64;
    if w2 > 0.0 {
        ln_q = ln_q.max((2.0 * w2).ln());
    }
    let mut lb_prev = 0.0f64; // ln b_0, b_0 = 1
    let mut lb = if w2 > 0.0 { w2.ln() } else { f64::NEG_INFINITY }; // ln b_1
    ln_q = ln_q.max(lb);
    for n in 1..n0 {
        let ln_2w2 = if w2 > 0.0 { (2.0 * w2).ln() } else { f64::NEG_INFINITY };
        let next = log_add(ln_2w2 + lb, (n as f64).ln() + lb_prev) - (2.0 * (2 * n + 1) as f64).ln();
        lb_prev = lb;
        lb = next;
        ln_q = ln_q.max(lb);
    }

    let ln_coeffs = coeffs.iter().map(|&a| a.ln()).collect();
    Ok(SeriesSolution {
        omega,
        coeffs,
        ln_coeffs,
        ln_q,
        n0,
    })
}

/// Number of stored terms that certifies evaluations up to `t_max` at around
/// machine precision, with headroom.
pub fn terms_for(omega: f64, t_max: f64) -> usize {
    let n0 = envelope_start(omega);
    let x = t_max * t_max;
    // walk the log tail bound ln q + (N+1) ln x - ln (N+1)! until it is
    // far below any partial sum of interest
    let ln_q = {
        // crude overestimate exp(ω²/2 + 8) of the envelope constant
        omega * omega / 2.0 + 8.0
    };
    let mut n = n0.max(x.ceil() as usize) + 2;
    let mut ln_fact = lgamma_int(n + 2);
    loop {
        let ln_tail = ln_q + (n as f64 + 1.0) * x.max(1e-300).ln() - ln_fact;
        if ln_tail < -40.0 {
            break;
        }
        n += 1;
        ln_fact += ((n + 1) as f64).ln();
        if n > 1_000_000 {
            break;
        }
    }
    n + 16
}

fn lgamma_int(n: usize) -> f64 {
    // ln((n-1)!) by direct summation; only used for modest n at build time
    let mut acc = 0.0;
    for k in 2..n {
        acc += (k as f64).ln();
    }
    acc
}

struct EvalOutcome {
    value: f64,
    /// true when the partial sum exceeded the saturation cap
    saturated: bool,
}

impl SeriesSolution {
    /// Shared evaluation core. `derivative` switches between `u` and `u'`.
    /// `cap`: once the (monotone) partial sum exceeds it the evaluation
    /// short-circuits, which is enough for reciprocal-square integrands.
    fn eval_core(&self, t: f64, rel_tol: f64, derivative: bool, cap: f64) -> Result<EvalOutcome> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
        }
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidArgument("rel_tol must be positive".into()));
        }
        if t == 0.0 {
            return Ok(EvalOutcome {
                value: if derivative { 0.0 } else { 1.0 },
                saturated: false,
            });
        }
        let x = t * t;
        let ln_x = x.ln();
        let mut sum = if derivative { 0.0 } else { 1.0 };
        let mut pow = 1.0; // t^{2k}
        let mut ln_fact = 0.0; // ln k!
        for k in 1..self.coeffs.len() {
            pow *= x;
            ln_fact += (k as f64).ln();
            let base = if pow.is_finite() {
                self.coeffs[k] * pow
            } else if self.ln_coeffs[k] == f64::NEG_INFINITY {
                0.0
            } else {
                // t^{2k} alone overflows while the term may not
                (self.ln_coeffs[k] + k as f64 * ln_x).exp()
            };
            let term = if derivative { 2.0 * k as f64 * base / t } else { base };
            sum += term;
            if sum > cap {
                return Ok(EvalOutcome {
                    value: sum,
                    saturated: true,
                });
            }
            if !sum.is_finite() {
                return Err(Error::Overflow(format!(
                    "series for omega = {} overflows at t = {t}",
                    self.omega
                )));
            }
            // certified stop: small last term and small factorial tail
            if k >= self.n0 && term <= rel_tol / 10.0 * sum.abs() {
                let ln_tail = if derivative {
                    // sum_{j>k} 2j a_j t^{2j-1} <= 2 t q sum_{j>=k} x^j / j!
                    if x < k as f64 + 1.0 {
                        (2.0 * t).ln() + self.ln_q + k as f64 * ln_x - ln_fact
                            - (1.0 - x / (k as f64 + 1.0)).ln()
                    } else {
                        f64::INFINITY
                    }
                } else if x < k as f64 + 2.0 {
                    // sum_{j>k} a_j t^{2j} <= q x^{k+1}/(k+1)! / (1 - x/(k+2))
                    self.ln_q + (k as f64 + 1.0) * ln_x - ln_fact - ((k + 1) as f64).ln()
                        - (1.0 - x / (k as f64 + 2.0)).ln()
                } else {
                    f64::INFINITY
                };
                if ln_tail <= (rel_tol * sum).ln() {
                    return Ok(EvalOutcome {
                        value: sum,
                        saturated: false,
                    });
                }
            }
        }
        Err(Error::SeriesBudget(format!(
            "tolerance {rel_tol:.1e} not certified at t = {t} with {} stored terms (omega = {})",
            self.coeffs.len(),
            self.omega
        )))
    }

    /// Evaluate `u(t, ω)` with a certified relative truncation error.
    pub fn eval_u(&self, t: f64, rel_tol: f64) -> Result<f64> {
        let out = self.eval_core(t, rel_tol, false, 1e300)?;
        if out.saturated {
            return Err(Error::Overflow(format!(
                "u({t}, {}) exceeds 1e300",
                self.omega
            )));
        }
        Ok(out.value)
    }

    /// Evaluate `u'(t, ω)`; exactly zero at `t = 0`.
    pub fn eval_u_prime(&self, t: f64, rel_tol: f64) -> Result<f64> {
        let out = self.eval_core(t, rel_tol, true, 1e300)?;
        if out.saturated {
            return Err(Error::Overflow(format!(
                "u'({t}, {}) exceeds 1e300",
                self.omega
            )));
        }
        Ok(out.value)
    }

    /// `u(t, ω)^{-2}`, rounding to exact zero once the partial sum certifies
    /// the reciprocal square is below 1e-300. All terms are nonnegative, so
    /// a partial sum above the cap already bounds `u` from below.
    fn inv_u_squared(&self, t: f64, rel_tol: f64) -> Result<f64> {
        let out = self.eval_core(t, rel_tol, false, 1e150)?;
        if out.saturated {
            return Ok(0.0);
        }
        Ok(1.0 / (out.value * out.value))
    }

    /// Companion decaying solution `v(t, ω) = u(t, ω)·∫_t^∞ u(s, ω)^{-2} ds`.
    ///
    /// The improper integral is cut at `S` where the monotonicity chain
    /// `u(t)·∫_S^∞ u^{-2} ≤ ∫_S^∞ u^{-1} < ∫_S^∞ sech(s²/3) ds ≤ (3/S)e^{-S²/3}`
    /// certifies the dropped tail below `abs_tol / cutoff_margin`.
    pub fn eval_v(&self, t: f64, qc: &QuadratureConfig) -> Result<f64> {
        qc.validate()?;
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
        }
        let cut = cutoff_for(|s| (3.0 / s) * (-s * s / 3.0).exp(), qc.abs_tol / qc.cutoff_margin);
        if cut <= t {
            // the whole remaining integral is below the certified tail bound
            return Ok(0.0);
        }
        let failure = std::cell::RefCell::new(None);
        let integral = quad::integrate(
            |s| match self.inv_u_squared(s, qc.rel_tol) {
                Ok(v) => v,
                Err(e) => {
                    failure.replace(Some(e));
                    f64::NAN
                }
            },
            t,
            cut,
            qc,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let integral = integral?;
        let u_t = self.eval_u(t, qc.rel_tol)?;
        let value = u_t * integral.value;
        if !value.is_finite() {
            return Err(Error::Overflow(format!("v({t}, {}) not finite", self.omega)));
        }
        Ok(value)
    }
}

/// Smallest `s ≥ 1` with `bound(s) ≤ target`, bracketed numerically on the
/// monotone range of the analytic tail bound.
fn cutoff_for(bound: impl Fn(f64) -> f64, target: f64) -> f64 {
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    while bound(hi) > target {
        lo = hi;
        hi *= 1.5;
        if hi > 1e3 {
            return hi;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// The decay integral `G(ω) = ∫_0^∞ u(s, ω)^{-2} ds`, strictly decreasing in
/// `ω` and vanishing at infinity.
pub fn eval_g(omega: f64, qc: &QuadratureConfig) -> Result<f64> {
    qc.validate()?;
    let cut = cutoff_for(
        |s| (3.0 / s) * (-2.0 * s * s / 3.0).exp(),
        qc.abs_tol / qc.cutoff_margin,
    );
    let series = build_series(omega, terms_for(omega, cut))?;
    let failure = std::cell::RefCell::new(None);
    let out = quad::integrate(
        |s| match series.inv_u_squared(s, qc.rel_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.replace(Some(e));
                f64::NAN
            }
        },
        0.0,
        cut,
        qc,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out?.value)
}

/// Threshold angle `arctan G(0)` for the half-line families.
pub fn alpha_a(qc: &QuadratureConfig) -> Result<f64> {
    Ok(eval_g(0.0, qc)?.atan())
}

/// Threshold angle `arctan(G(0)/√2)` for the one-parameter whole-line family.
pub fn alpha_b(qc: &QuadratureConfig) -> Result<f64> {
    Ok((eval_g(0.0, qc)? / std::f64::consts::SQRT_2).atan())
}
