//! Oscillator eigenfunctions, the explicit kernel solutions at energy -1/2,
//! and the ladder maps `t ∓ d/dt` acting on sampled functions.
//!
//! The normalized eigenfunctions are evaluated through the stable
//! three-term recurrence
//!
//! ```text
//! ψ_{n+1}(t) = t √(2/(n+1)) ψ_n(t) - √(n/(n+1)) ψ_{n-1}(t),
//! ψ_n'(t)    = √(2n) ψ_{n-1}(t) - t ψ_n(t),
//! ```
//!
//! which keeps all intermediates O(1); the raw polynomial coefficients and
//! the norm constant are exposed for inspection but are not the evaluation
//! path. Note on normalization: `⟨ψ_0, ψ_0⟩ = 1` forces the prefactor
//! `π^{-1/4}` on the ground state, and that is what the recurrence uses.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, GridFunction, Side};

/// Index guard: the norm constant is computed in log space, but grid work
/// beyond this order has no consumers here.
pub const MAX_HERMITE_INDEX: usize = 60;

/// Overflow guard for the explicit kernel solutions.
pub const PHI_ARG_MAX: f64 = 8.0;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// One oscillator eigenfunction `ψ_n(t) = c_n e^{-t²/2} H_n(t)`.
#[derive(Debug, Clone)]
pub struct HermiteFunction {
    n: usize,
    /// Coefficients of `H_n` in increasing degree. Exact integers as f64 up
    /// to the 52-bit mantissa; for large `n` the values are approximate and
    /// evaluation goes through the normalized recurrence instead.
    poly_coeffs: Vec<f64>,
    /// `c_n = (π^{1/2} 2^n n!)^{-1/2}`, computed in log space.
    norm_const: f64,
}

impl HermiteFunction {
    pub fn index(&self) -> usize {
        self.n
    }

    pub fn poly_coeffs(&self) -> &[f64] {
        &self.poly_coeffs
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Value of `ψ_n(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        normalized_recurrence(self.n, t).0
    }

    /// Value of `ψ_n'(t)`.
    pub fn eval_deriv(&self, t: f64) -> f64 {
        let (psi_n, psi_prev) = normalized_recurrence(self.n, t);
        let n = self.n as f64;
        (2.0 * n).sqrt() * psi_prev - t * psi_n
    }
}

/// Returns `(ψ_n(t), ψ_{n-1}(t))`; the second entry is 0 for `n = 0`.
fn normalized_recurrence(n: usize, t: f64) -> (f64, f64) {
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-t * t / 2.0).exp();
    if n == 0 {
        return (psi0, 0.0);
    }
    let mut prev = psi0;
    let mut cur = t * std::f64::consts::SQRT_2 * psi0;
    for k in 1..n {
        let kf = k as f64;
        let next = t * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Build `ψ_n`.
pub fn psi(n: usize) -> Result<HermiteFunction> {
    if n > MAX_HERMITE_INDEX {
        return Err(Error::OutOfRange(format!(
            "hermite index {n} above guard {MAX_HERMITE_INDEX}"
        )));
    }
    // H_{k+1} = 2t H_k - 2k H_{k-1}
    let mut prev = vec![1.0f64];
    let mut cur = vec![0.0, 2.0];
    if n == 0 {
        cur = prev.clone();
    } else {
        for k in 1..n {
            let mut next = vec![0.0; k + 2];
            for (j, &c) in cur.iter().enumerate() {
                next[j + 1] += 2.0 * c;
            }
            for (j, &c) in prev.iter().enumerate() {
                next[j] -= 2.0 * k as f64 * c;
            }
            prev = cur;
            cur = next;
        }
    }
    let ln_norm = -0.5 * (0.5 * std::f64::consts::PI.ln() + n as f64 * std::f64::consts::LN_2 + ln_factorial(n));
    Ok(HermiteFunction {
        n,
        poly_coeffs: cur,
        norm_const: ln_norm.exp(),
    })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ψ_n` sampled on the default lattice, with exact derivative samples.
pub fn psi_grid(n: usize) -> Result<GridFunction> {
    let h = psi(n)?;
    Ok(GridFunction::from_smooth(
        crate::grid::DEFAULT_EXTENT,
        |t| h.eval(t),
        |t| h.eval_deriv(t),
    ))
}

/// `φ_1(t) = e^{t²/2}`, the growing solution at energy -1/2.
pub fn phi_one(t: f64) -> Result<f64> {
    guard_phi_arg(t)?;
    Ok((t * t / 2.0).exp())
}

/// `φ_+(t) = e^{t²/2} ∫_t^∞ e^{-s²} ds`, decaying on the right half-line.
pub fn phi_plus(t: f64) -> Result<f64> {
    guard_phi_arg(t)?;
    Ok((t * t / 2.0).exp() * 0.5 * SQRT_PI * erfc(t))
}

/// `φ_-(t) = φ_+(-t)`, decaying on the left half-line.
pub fn phi_minus(t: f64) -> Result<f64> {
    phi_plus(-t)
}

/// `φ_+'(t) = t φ_+(t) - e^{-t²/2}`.
pub fn phi_plus_deriv(t: f64) -> Result<f64> {
    Ok(t * phi_plus(t)? - (-t * t / 2.0).exp())
}

fn guard_phi_arg(t: f64) -> Result<()> {
    if t.abs() > PHI_ARG_MAX {
        return Err(Error::OutOfRange(format!(
            "|t| = {} above the overflow guard {PHI_ARG_MAX}",
            t.abs()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LadderKind {
    /// `t - d/dt`, shifts the spectral parameter up by one.
    Raise,
    /// `d/dt + t`, shifts it down by one and annihilates the ground state.
    Lower,
}

fn apply_ladder(f: &GridFunction, kind: LadderKind) -> Result<GridFunction> {
    if f.xs_pos.len() < 5 || f.xs_neg.len() < 5 {
        return Err(Error::GridTooCoarse(
            "ladder maps need at least 5 points per side".into(),
        ));
    }
    let sign = match kind {
        LadderKind::Raise => -1.0,
        LadderKind::Lower => 1.0,
    };
    // value: t f ± f'; derivative: f'' is unavailable exactly, use second
    // differences of the stored values (O(h²)) plus the product-rule terms
    let map_side = |xs: &[f64], vals: &[f64], dvals: &[f64], side: Side| -> Result<(Vec<f64>, Vec<f64>)> {
        let dd = f.second_derivative(side)?;
        let mut new_vals = Vec::with_capacity(vals.len());
        let mut new_dvals = Vec::with_capacity(vals.len());
        for i in 0..xs.len() {
            let t = xs[i];
            new_vals.push(t * vals[i] + sign * dvals[i]);
            new_dvals.push(vals[i] + t * dvals[i] + sign * dd[i]);
        }
        Ok((new_vals, new_dvals))
    };
    let (vals_pos, dvals_pos) = map_side(&f.xs_pos, &f.vals_pos, &f.dvals_pos, Side::Plus)?;
    let (vals_neg, dvals_neg) = map_side(&f.xs_neg, &f.vals_neg, &f.dvals_neg, Side::Minus)?;

    let ddp = f.second_derivative_at_origin(Side::Plus)?;
    let ddm = f.second_derivative_at_origin(Side::Minus)?;
    let b = &f.boundary;
    let boundary = BoundaryData::from_real(
        sign * b.df_minus.re,
        b.f_minus.re + sign * ddm,
        sign * b.df_plus.re,
        b.f_plus.re + sign * ddp,
    );
    GridFunction::from_parts(
        f.xs_neg.clone(),
        vals_neg,
        dvals_neg,
        f.xs_pos.clone(),
        vals_pos,
        dvals_pos,
        boundary,
    )
}

/// Apply `t - d/dt` to sampled data.
pub fn ladder_raise(f: &GridFunction) -> Result<GridFunction> {
    apply_ladder(f, LadderKind::Raise)
}

/// Apply `d/dt + t` to sampled data.
pub fn ladder_lower(f: &GridFunction) -> Result<GridFunction> {
    apply_ladder(f, LadderKind::Lower)
}

/// Piecewise eigenfunction candidates at energy `-n - 1/2`: apply the
/// lowering map `n` times to `φ_+` on the right half-line and to `φ_-` on
/// the left. For even `n` the result is continuous at the origin while its
/// derivative jumps, so it selects exactly one member of the one-parameter
/// whole-line family.
pub fn ladder_eigenfunction(n: usize) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::InvalidArgument("ladder index must be positive".into()));
    }
    if n > 8 {
        return Err(Error::AccuracyBudget {
            estimate: (n as f64) * crate::grid::DEFAULT_STEP * crate::grid::DEFAULT_STEP,
        });
    }
    // build the φ pair on [-8, 8]: φ_+ on the right, its mirror on the left
    let extent = PHI_ARG_MAX;
    let nsteps = (extent / crate::grid::DEFAULT_STEP).round() as i64;
    let mut xs_pos = Vec::with_capacity(nsteps as usize);
    for k in 1..=nsteps {
        xs_pos.push(k as f64 * crate::grid::DEFAULT_STEP);
    }
    let xs_neg: Vec<f64> = xs_pos.iter().rev().map(|&x| -x).collect();
    let vals_pos: Vec<f64> = xs_pos.iter().map(|&x| phi_plus(x).unwrap()).collect();
    let dvals_pos: Vec<f64> = xs_pos.iter().map(|&x| phi_plus_deriv(x).unwrap()).collect();
    // φ_-(t) = φ_+(-t), φ_-'(t) = -φ_+'(-t)
    let vals_neg: Vec<f64> = xs_neg.iter().map(|&x| phi_plus(-x).unwrap()).collect();
    let dvals_neg: Vec<f64> = xs_neg.iter().map(|&x| -phi_plus_deriv(-x).unwrap()).collect();
    let p0 = phi_plus(0.0)?;
    let dp0 = phi_plus_deriv(0.0)?;
    let mut f = GridFunction::from_parts(
        xs_neg,
        vals_neg,
        dvals_neg,
        xs_pos,
        vals_pos,
        dvals_pos,
        BoundaryData::from_real(p0, -dp0, p0, dp0),
    )?;
    for _ in 0..n {
        f = ladder_lower(&f)?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{self, QuadratureConfig};
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_structure() {
        for n in 0..=10 {
            let h = psi(n).unwrap();
            assert_eq!(h.poly_coeffs().len(), n + 1);
            assert_relative_eq!(h.poly_coeffs()[n], (2.0f64).powi(n as i32));
            // parity: alternating coefficients vanish
            for (j, &c) in h.poly_coeffs().iter().enumerate() {
                if (n - j) % 2 == 1 {
                    assert_eq!(c, 0.0, "H_{n} coefficient {j}");
                }
            }
        }
        assert!(psi(61).is_err());
    }

    #[test]
    fn ground_state_is_normalized_gaussian() {
        let h = psi(0).unwrap();
        let cfg = QuadratureConfig::default();
        let norm = quad::integrate(|t| h.eval(t) * h.eval(t), -12.0, 12.0, &cfg).unwrap();
        assert_relative_eq!(norm.value, 1.0, max_relative = 1e-12);
        assert_relative_eq!(h.eval(0.0), std::f64::consts::PI.powf(-0.25), epsilon = 1e-15);
    }

    #[test]
    fn parity_table_at_origin() {
        for n in 0..=10 {
            let h = psi(n).unwrap();
            if n % 2 == 0 {
                assert!(h.eval(0.0).abs() > 1e-3, "psi_{n}(0) must not vanish");
                assert_eq!(h.eval_deriv(0.0), 0.0, "psi_{n}'(0) must vanish");
            } else {
                assert_eq!(h.eval(0.0), 0.0, "psi_{n}(0) must vanish");
                assert!(h.eval_deriv(0.0).abs() > 1e-3, "psi_{n}'(0) must not vanish");
            }
            // mirror symmetry
            for t in [0.3, 1.1, 2.7] {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_relative_eq!(h.eval(-t), s * h.eval(t), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn orthonormality_gram_matrix() {
        let cfg = QuadratureConfig::default();
        let fns: Vec<_> = (0..10).map(|n| psi(n).unwrap()).collect();
        for i in 0..10 {
            for j in i..10 {
                let v = quad::integrate(|t| fns[i].eval(t) * fns[j].eval(t), -12.0, 12.0, &cfg)
                    .unwrap()
                    .value;
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (v - expected).abs() < 1e-8,
                    "<psi_{i}, psi_{j}> = {v}"
                );
            }
        }
    }

    #[test]
    fn eigen_relation_via_finite_differences() {
        let h_step = 1e-2;
        for n in [0usize, 1, 4, 9] {
            let f = psi(n).unwrap();
            for t in [-1.7, 0.2, 1.3] {
                let u = |x: f64| f.eval(x);
                let upp = (-u(t + 2.0 * h_step) + 16.0 * u(t + h_step) - 30.0 * u(t)
                    + 16.0 * u(t - h_step)
                    - u(t - 2.0 * h_step))
                    / (12.0 * h_step * h_step);
                let lhs = -0.5 * upp + 0.5 * t * t * u(t);
                let rhs = (n as f64 + 0.5) * u(t);
                assert!(
                    (lhs - rhs).abs() / rhs.abs().max(1.0) < 1e-6,
                    "eigen relation residual for n={n} at t={t}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn derivative_recurrence_matches_differences() {
        let f = psi(5).unwrap();
        let h = 1e-4;
        for t in [-2.0, 0.4, 1.9] {
            let num = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
            assert_relative_eq!(num, f.eval_deriv(t), max_relative = 1e-7);
        }
    }

    #[test]
    fn phi_values_and_sum_identity() {
        assert_relative_eq!(phi_plus(0.0).unwrap(), SQRT_PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(phi_plus_deriv(0.0).unwrap(), -1.0, epsilon = 1e-14);
        for t in [-1.0, 0.0, 2.0] {
            let s = phi_plus(t).unwrap() + phi_minus(t).unwrap();
            assert_relative_eq!(s, SQRT_PI * phi_one(t).unwrap(), max_relative = 1e-12);
        }
        assert!(phi_plus(8.5).is_err());
    }

    #[test]
    fn phi_plus_solves_the_shifted_equation() {
        // (-1/2 d²/dt² + t²/2 + 1/2) φ_+ = 0
        let h = 1e-2;
        for t in [-1.5, 0.0, 1.0, 2.5] {
            let u = |x: f64| phi_plus(x).unwrap();
            let upp = (-u(t + 2.0 * h) + 16.0 * u(t + h) - 30.0 * u(t) + 16.0 * u(t - h)
                - u(t - 2.0 * h))
                / (12.0 * h * h);
            let res = -0.5 * upp + 0.5 * t * t * u(t) + 0.5 * u(t);
            assert!(res.abs() < 1e-7, "residual {res:.2e} at t={t}");
        }
    }

    #[test]
    fn lowering_annihilates_the_ground_state() {
        let g = psi_grid(0).unwrap();
        let out = ladder_lower(&g).unwrap();
        assert!(out.sup_norm() < 1e-8, "sup {}", out.sup_norm());
    }

    #[test]
    fn raising_the_ground_state_gives_the_first_excited_state() {
        let g = psi_grid(0).unwrap();
        let raised = ladder_raise(&g).unwrap();
        let target = psi_grid(1).unwrap();
        // (t - d/dt) ψ_0 = √2 ψ_1
        let scale = std::f64::consts::SQRT_2;
        for i in (0..g.xs_pos.len()).step_by(97) {
            assert_relative_eq!(
                raised.vals_pos[i],
                scale * target.vals_pos[i],
                epsilon = 1e-10,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn ladder_shifts_the_spectral_parameter() {
        // ψ_1 solves (A - 3/2)f = 0; its raise solves (A - 5/2)f = 0
        let raised = ladder_raise(&psi_grid(1).unwrap()).unwrap();
        let h = crate::grid::DEFAULT_STEP;
        let mut worst: f64 = 0.0;
        for i in 2..raised.xs_pos.len() - 2 {
            if i % 53 != 0 {
                continue;
            }
            let t = raised.xs_pos[i];
            if t > 6.0 {
                break;
            }
            let v = &raised.vals_pos;
            let upp = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2])
                / (12.0 * h * h);
            let res = -0.5 * upp + 0.5 * t * t * v[i] - 2.5 * v[i];
            worst = worst.max(res.abs());
        }
        assert!(worst < 1e-6, "worst residual {worst:.2e}");
    }

    #[test]
    fn ladder_eigenfunction_even_index_is_continuous_with_slope_jump() {
        let u2 = ladder_eigenfunction(2).unwrap();
        let defect = (u2.boundary.f_plus.re - u2.boundary.f_minus.re).abs();
        assert!(
            defect < 1e-8 * u2.sup_norm(),
            "continuity defect {defect:.2e} vs sup {}",
            u2.sup_norm()
        );
        let jump = (u2.boundary.df_plus.re - u2.boundary.df_minus.re).abs();
        assert!(jump > 1e-3, "derivative jump {jump:.2e} should not vanish");
    }

    #[test]
    fn ladder_eigenfunction_mirror_symmetry() {
        for n in [1usize, 2, 3] {
            let u = ladder_eigenfunction(n).unwrap();
            let len = u.xs_pos.len();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for i in (0..len).step_by(211) {
                let right = u.vals_pos[i];
                let left = u.vals_neg[len - 1 - i];
                assert_relative_eq!(right, sign * left, epsilon = 1e-9, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn ladder_eigenfunction_solves_the_shifted_equation() {
        let u2 = ladder_eigenfunction(2).unwrap();
        let h = crate::grid::DEFAULT_STEP;
        let mut worst: f64 = 0.0;
        for i in (2..u2.xs_pos.len() - 2).step_by(149) {
            let t = u2.xs_pos[i];
            if t > 5.0 {
                break;
            }
            let v = &u2.vals_pos;
            let upp = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2])
                / (12.0 * h * h);
            let res = -0.5 * upp + 0.5 * t * t * v[i] + 2.5 * v[i];
            worst = worst.max(res.abs() / u2.sup_norm());
        }
        assert!(worst < 1e-4, "worst relative residual {worst:.2e}");
    }

    #[test]
    fn odd_restrictions_span_smooth_odd_functions_on_the_half_line() {
        // a smooth odd function with Gaussian-type decay projects onto the
        // first 21 odd eigenfunction restrictions almost entirely
        let cfg = QuadratureConfig::default();
        let f = |t: f64| t * (-t * t / 3.0).exp() + 0.4 * t * t * t * (-t * t / 2.5).exp();
        let norm_sq = quad::integrate(|t| f(t) * f(t), 0.0, 12.0, &cfg).unwrap().value;
        let mut captured = 0.0;
        for n in 0..=20 {
            let h = psi(2 * n + 1).unwrap();
            let c = quad::integrate(|t| f(t) * h.eval(t), 0.0, 12.0, &cfg).unwrap().value;
            // ‖ψ_{2n+1}‖² over the half-line is 1/2
            captured += c * c / 0.5;
        }
        assert!(
            captured >= 0.999 * norm_sq,
            "captured {captured} of {norm_sq}"
        );
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let b = BoundaryData::from_real(1.0, 0.0, 1.0, 0.0);
        let g = GridFunction::from_parts(
            vec![-3.0, -2.0, -1.0],
            vec![0.0; 3],
            vec![0.0; 3],
            vec![1.0, 2.0, 3.0],
            vec![0.0; 3],
            vec![0.0; 3],
            b,
        )
        .unwrap();
        assert!(matches!(ladder_lower(&g), Err(Error::GridTooCoarse(_))));
        assert!(matches!(ladder_eigenfunction(9), Err(Error::AccuracyBudget { .. })));
    }
}
