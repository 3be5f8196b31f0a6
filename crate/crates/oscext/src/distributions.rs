//! Point functionals at the origin realized as integrals.
//!
//! With `v(·, 0)` the decaying zero-energy solution, the even and odd
//! reflections
//!
//! ```text
//! w₁(t) = v(|t|, 0),    w₂(t) = sign(t)·v(|t|, 0)
//! ```
//!
//! have traces `w₁(±0) = w₂(+0) = -w₂(-0) = G(0)` and
//! `w₁'(+0) = -w₁'(-0) = w₂'(±0) = -1`. Integration by parts turns them
//! into kernels for the value and slope functionals on the graph-norm
//! space of the oscillator `A = -d²/dt²/2 + t²/2`:
//!
//! ```text
//! ⟨Af, w⟩ = 1/2 f'(0)[w(+0) - w(-0)] + 1/2 f(0)[w'(-0) - w'(+0)]
//! ```
//!
//! whenever `Aw = 0` on each open half-line, hence
//!
//! ```text
//! f(0) = ⟨Af, w₁⟩,    f'(0) = ⟨Af, w₂⟩ / G(0),
//! ```
//!
//! and the same computation expresses the adjoint of the oscillator on
//! broken functions as the smooth adjoint plus jump-weighted point terms,
//! which [`perturbation_identity_check`] verifies numerically.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, GridFunction, Side, DEFAULT_EXTENT, DEFAULT_STEP};
use crate::hermite;
use crate::quad::QuadratureConfig;
use crate::series;

/// A function in the oscillator's graph-norm space: smooth across the
/// origin, square-integrable together with its oscillator image.
#[derive(Debug, Clone)]
pub struct TestFunction {
    /// The function itself on the default lattice.
    pub f: GridFunction,
    /// Its oscillator image `-f''/2 + t²f/2`, exact for the built-in
    /// constructors.
    pub af: GridFunction,
    /// Graph norm `(‖f‖² + ‖Af‖²)^{1/2}`.
    pub plus_norm: f64,
}

impl TestFunction {
    /// Value trace at the origin.
    pub fn value0(&self) -> f64 {
        self.f.boundary.f_plus.re
    }

    /// Slope trace at the origin.
    pub fn dvalue0(&self) -> f64 {
        self.f.boundary.df_plus.re
    }

    fn from_closures(
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        af: impl Fn(f64) -> f64,
        daf: impl Fn(f64) -> f64,
    ) -> TestFunction {
        let fg = GridFunction::from_smooth(DEFAULT_EXTENT, &f, &df);
        let ag = GridFunction::from_smooth(DEFAULT_EXTENT, &af, &daf);
        let plus_norm = (fg.l2_norm_sq() + ag.l2_norm_sq()).sqrt();
        TestFunction {
            f: fg,
            af: ag,
            plus_norm,
        }
    }

    /// Oscillator eigenfunction `ψ_n`, whose image is `(n + 1/2) ψ_n`.
    pub fn from_hermite(n: usize) -> Result<TestFunction> {
        let h = hermite::psi(n)?;
        let ev = n as f64 + 0.5;
        let h2 = h.clone();
        let h3 = h.clone();
        let h4 = h.clone();
        Ok(Self::from_closures(
            move |t| h.eval(t),
            move |t| h2.eval_deriv(t),
            move |t| ev * h3.eval(t),
            move |t| ev * h4.eval_deriv(t),
        ))
    }

    /// Exact polynomial-times-Gaussian member.
    pub fn from_poly_gauss(pg: &PolyGauss) -> TestFunction {
        let a = pg.clone();
        let b = pg.derivative();
        let c = pg.oscillator_image();
        let d = c.derivative();
        Self::from_closures(
            move |t| a.eval(t),
            move |t| b.eval(t),
            move |t| c.eval(t),
            move |t| d.eval(t),
        )
    }
}

/// Polynomial with ascending real coefficients.
#[derive(Debug, Clone, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    fn shift_up(&self, powers: usize) -> Poly {
        let mut v = vec![0.0; powers];
        v.extend_from_slice(&self.0);
        Poly(v)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut v = vec![0.0; n];
        for (i, &c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, &c) in other.0.iter().enumerate() {
            v[i] += c;
        }
        Poly(v)
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|&c| s * c).collect())
    }
}

/// Finite sum of `p_i(t)·exp(-a_i t²)` terms, closed under differentiation
/// and under the oscillator, so all traces and images are exact.
#[derive(Debug, Clone, Default)]
pub struct PolyGauss {
    pub terms: Vec<(Poly, f64)>,
}

impl PolyGauss {
    pub fn new(terms: Vec<(Poly, f64)>) -> PolyGauss {
        PolyGauss { terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, a)| p.eval(t) * (-a * t * t).exp())
            .sum()
    }

    pub fn derivative(&self) -> PolyGauss {
        // (p e^{-at²})' = (p' - 2atp) e^{-at²}
        PolyGauss {
            terms: self
                .terms
                .iter()
                .map(|(p, a)| {
                    let q = p.derivative().add(&p.shift_up(1).scale(-2.0 * a));
                    (q, *a)
                })
                .collect(),
        }
    }

    /// `-f''/2 + t²f/2` term by term.
    pub fn oscillator_image(&self) -> PolyGauss {
        PolyGauss {
            terms: self
                .terms
                .iter()
                .map(|(p, a)| {
                    // -p''/2 + a p + 2a t p' + (1/2 - 2a²) t² p
                    let q = p
                        .derivative()
                        .derivative()
                        .scale(-0.5)
                        .add(&p.scale(*a))
                        .add(&p.derivative().shift_up(1).scale(2.0 * a))
                        .add(&p.shift_up(2).scale(0.5 - 2.0 * a * a));
                    (q, *a)
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &PolyGauss) -> PolyGauss {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PolyGauss { terms }
    }

    pub fn scale(&self, s: f64) -> PolyGauss {
        PolyGauss {
            terms: self.terms.iter().map(|(p, a)| (p.scale(s), *a)).collect(),
        }
    }
}

/// Build the kernel pair `(w₁, w₂)` and `G(0)` on the default lattice.
fn kernels() -> Result<&'static (GridFunction, GridFunction, f64)> {
    static KERNELS: OnceLock<std::result::Result<(GridFunction, GridFunction, f64), Error>> =
        OnceLock::new();
    KERNELS
        .get_or_init(build_kernels)
        .as_ref()
        .map_err(|e| e.clone())
}

fn build_kernels() -> std::result::Result<(GridFunction, GridFunction, f64), Error> {
    let rel = 1e-12;
    let s = series::build_series(0.0, series::terms_for(0.0, DEFAULT_EXTENT))?;
    let n = (DEFAULT_EXTENT / DEFAULT_STEP).round() as usize;
    let mut xs = Vec::with_capacity(n);
    for k in 1..=n {
        xs.push(k as f64 * DEFAULT_STEP);
    }
    // u and u' on the closed lattice including the origin
    let mut u = Vec::with_capacity(n + 1);
    let mut du = Vec::with_capacity(n + 1);
    u.push(1.0);
    du.push(0.0);
    for &x in &xs {
        u.push(s.eval_u(x, rel)?);
        du.push(s.eval_u_prime(x, rel)?);
    }
    // suffix integrals I(x_j) = ∫_{x_j}^∞ u^{-2}, tail below 1e-15 past the
    // certified cutoff
    let cfg = QuadratureConfig {
        rel_tol: rel,
        abs_tol: 1e-15,
        ..Default::default()
    };
    let mut cells = vec![0.0; n + 1];
    for j in 0..n {
        let a = j as f64 * DEFAULT_STEP;
        let b = a + DEFAULT_STEP;
        cells[j] = crate::quad::integrate(|t| 1.0 / (s.eval_u(t, rel).unwrap().powi(2)), a, b, &cfg)?
            .value;
    }
    let mut suffix = vec![0.0; n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + cells[j];
    }
    let g0 = suffix[0];
    // v = u·I and v' = u'·I - 1/u on the open lattice
    let vals: Vec<f64> = (1..=n).map(|j| u[j] * suffix[j]).collect();
    let dvals: Vec<f64> = (1..=n).map(|j| du[j] * suffix[j] - 1.0 / u[j]).collect();

    let xs_neg: Vec<f64> = xs.iter().rev().map(|&x| -x).collect();
    let even = GridFunction::from_parts(
        xs_neg.clone(),
        vals.iter().rev().cloned().collect(),
        dvals.iter().rev().map(|&d| -d).collect(),
        xs.clone(),
        vals.clone(),
        dvals.clone(),
        BoundaryData::from_real(g0, 1.0, g0, -1.0),
    )?;
    let odd = GridFunction::from_parts(
        xs_neg,
        vals.iter().rev().map(|&v| -v).collect(),
        dvals.iter().rev().cloned().collect(),
        xs,
        vals,
        dvals,
        BoundaryData::from_real(-g0, -1.0, g0, -1.0),
    )?;
    Ok((even, odd, g0))
}

/// The kernel functions: index 1 is the even reflection of `v(·, 0)`,
/// index 2 the odd one.
pub fn w_function(index: usize) -> Result<GridFunction> {
    let (w1, w2, _) = kernels()?;
    match index {
        1 => Ok(w1.clone()),
        2 => Ok(w2.clone()),
        _ => Err(Error::InvalidArgument(format!("kernel index must be 1 or 2, got {index}"))),
    }
}

/// Value functional: `⟨Af, w₁⟩ = f(0)`.
pub fn delta_functional(f: &TestFunction, qc: &QuadratureConfig) -> Result<f64> {
    qc.validate()?;
    let (w1, _, _) = kernels()?;
    f.af.inner(w1)
}

/// Slope functional: `⟨Af, w₂⟩ / G(0) = f'(0)`.
pub fn delta_prime_functional(f: &TestFunction, qc: &QuadratureConfig) -> Result<f64> {
    qc.validate()?;
    let (_, w2, g0) = kernels()?;
    Ok(f.af.inner(w2)? / g0)
}

/// `|f(0)| / ‖f‖₊`, bounded by `½‖w₁‖` uniformly.
pub fn boundedness_ratio(f: &TestFunction) -> Result<f64> {
    if f.plus_norm <= 0.0 {
        return Err(Error::InvalidArgument("zero test function".into()));
    }
    Ok(f.value0().abs() / f.plus_norm)
}

/// Apply the oscillator to sampled data on each half-line, returning value
/// samples and one-sided origin traces. Interior stencils are fourth order.
fn oscillator_on_grid(g: &GridFunction) -> Result<(Vec<f64>, Vec<f64>, f64, f64)> {
    let ddm = g.second_derivative(Side::Minus)?;
    let ddp = g.second_derivative(Side::Plus)?;
    let neg: Vec<f64> = g
        .xs_neg
        .iter()
        .zip(g.vals_neg.iter().zip(ddm.iter()))
        .map(|(&x, (&v, &dd))| -0.5 * dd + 0.5 * x * x * v)
        .collect();
    let pos: Vec<f64> = g
        .xs_pos
        .iter()
        .zip(g.vals_pos.iter().zip(ddp.iter()))
        .map(|(&x, (&v, &dd))| -0.5 * dd + 0.5 * x * x * v)
        .collect();
    let at_minus = -0.5 * g.second_derivative_at_origin(Side::Minus)? + 0.0;
    let at_plus = -0.5 * g.second_derivative_at_origin(Side::Plus)? + 0.0;
    Ok((neg, pos, at_minus, at_plus))
}

/// Discrepancy between the two readings of the adjoint on broken data:
/// `⟨f, A₀*g⟩` against `⟨Af, g⟩ - ½[g](0)·f'(0) + ½[g'](0)·f(0)` where
/// `[·]` denotes the jump at the origin. Small exactly when the
/// jump-correction identity holds. Real-valued data only.
pub fn perturbation_identity_check(
    g: &GridFunction,
    f: &TestFunction,
    qc: &QuadratureConfig,
) -> Result<f64> {
    qc.validate()?;
    if g.xs_pos.len() != f.f.xs_pos.len() || g.xs_neg.len() != f.f.xs_neg.len() {
        return Err(Error::InvalidArgument("g must live on the default lattice".into()));
    }
    let (ag_neg, ag_pos, ag_m, ag_p) = oscillator_on_grid(g)?;
    let ag = GridFunction::from_parts(
        g.xs_neg.clone(),
        ag_neg,
        vec![0.0; g.xs_neg.len()],
        g.xs_pos.clone(),
        ag_pos,
        vec![0.0; g.xs_pos.len()],
        BoundaryData::from_real(ag_m, 0.0, ag_p, 0.0),
    )?;
    let lhs = f.f.inner(&ag)?;
    let jump_val = g.boundary.f_plus.re - g.boundary.f_minus.re;
    let jump_slope = g.boundary.df_plus.re - g.boundary.df_minus.re;
    let rhs = f.af.inner(g)? - 0.5 * jump_val * f.dvalue0() + 0.5 * jump_slope * f.value0();
    Ok((lhs - rhs).abs())
}

/// Deterministic pseudo-random stream for suite construction.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// The 26-member verification suite: the first six eigenfunctions plus
/// twenty seeded polynomial-Gaussian functions.
pub fn standard_suite(seed: u64) -> Result<Vec<TestFunction>> {
    let mut suite = Vec::with_capacity(26);
    for n in 0..6 {
        suite.push(TestFunction::from_hermite(n)?);
    }
    let mut rng = SplitMix64(seed);
    for _ in 0..20 {
        let mut terms = Vec::new();
        for _ in 0..2 {
            let deg = 2 + (rng.next_u64() % 3) as usize;
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.in_range(-1.0, 1.0)).collect();
            let alpha = rng.in_range(0.35, 0.8);
            terms.push((Poly(coeffs), alpha));
        }
        suite.push(TestFunction::from_poly_gauss(&PolyGauss::new(terms)));
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn qc() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn kernel_traces() {
        let (w1, w2, g0) = kernels().unwrap();
        let g0 = *g0;
        assert!(g0 > 1.0 && g0 < 2.0, "G(0) = {g0}");
        assert_relative_eq!(w1.boundary.f_plus.re, g0);
        assert_relative_eq!(w1.boundary.f_minus.re, g0);
        assert_relative_eq!(w2.boundary.f_plus.re, g0);
        assert_relative_eq!(w2.boundary.f_minus.re, -g0);
        assert_eq!(w1.boundary.df_plus.re, -1.0);
        assert_eq!(w1.boundary.df_minus.re, 1.0);
        assert_eq!(w2.boundary.df_plus.re, -1.0);
        assert_eq!(w2.boundary.df_minus.re, -1.0);
        // G(0) agrees with the adaptive evaluation
        let g = series::eval_g(0.0, &qc()).unwrap();
        assert_relative_eq!(g0, g, max_relative = 1e-10);
    }

    #[test]
    fn kernels_are_square_integrable_with_negligible_far_tail() {
        for idx in [1, 2] {
            let w = w_function(idx).unwrap();
            let total = w.l2_norm_sq();
            let tail = w.integrate_side(Side::Plus, |x, v| if x > 6.0 { v * v } else { 0.0 })
                + w.integrate_side(Side::Minus, |x, v| if x < -6.0 { v * v } else { 0.0 });
            assert!(total > 0.0);
            assert!(tail / total < 1e-10, "tail fraction {}", tail / total);
        }
    }

    #[test]
    fn value_functional_on_eigenfunctions() {
        let qc = qc();
        let f0 = TestFunction::from_hermite(0).unwrap();
        let d = delta_functional(&f0, &qc).unwrap();
        assert_relative_eq!(d, std::f64::consts::PI.powf(-0.25), max_relative = 1e-6);

        let f1 = TestFunction::from_hermite(1).unwrap();
        let d = delta_functional(&f1, &qc).unwrap();
        assert!(d.abs() < 1e-8, "odd state should give zero, got {d}");
        let dp = delta_prime_functional(&f1, &qc).unwrap();
        assert_relative_eq!(dp, f1.dvalue0(), max_relative = 1e-6);
    }

    #[test]
    fn functionals_recover_traces_on_the_suite() {
        let qc = qc();
        for (k, f) in standard_suite(7).unwrap().iter().enumerate() {
            let d = delta_functional(f, &qc).unwrap();
            let dp = delta_prime_functional(f, &qc).unwrap();
            let scale = f.value0().abs().max(1.0);
            assert!(
                (d - f.value0()).abs() / scale < 1e-6,
                "member {k}: delta {d} vs {}",
                f.value0()
            );
            let dscale = f.dvalue0().abs().max(1.0);
            assert!(
                (dp - f.dvalue0()).abs() / dscale < 1e-6,
                "member {k}: delta' {dp} vs {}",
                f.dvalue0()
            );
        }
    }

    #[test]
    fn functionals_are_linear() {
        let qc = qc();
        let a = PolyGauss::new(vec![(Poly(vec![0.3, -0.7, 0.2]), 0.5)]);
        let b = PolyGauss::new(vec![(Poly(vec![-0.1, 0.4, 0.0, 0.3]), 0.6)]);
        let combo = a.scale(2.5).add(&b.scale(-1.5));
        let fa = TestFunction::from_poly_gauss(&a);
        let fb = TestFunction::from_poly_gauss(&b);
        let fc = TestFunction::from_poly_gauss(&combo);
        let lin = 2.5 * delta_functional(&fa, &qc).unwrap() - 1.5 * delta_functional(&fb, &qc).unwrap();
        let direct = delta_functional(&fc, &qc).unwrap();
        assert_relative_eq!(lin, direct, epsilon = 1e-8, max_relative = 1e-8);
    }

    #[test]
    fn plus_norm_matches_quadrature() {
        for f in standard_suite(3).unwrap().iter().take(8) {
            let recomputed = (f.f.l2_norm_sq() + f.af.l2_norm_sq()).sqrt();
            assert_relative_eq!(recomputed, f.plus_norm, max_relative = 1e-8);
        }
    }

    #[test]
    fn boundedness_holds_across_the_suite() {
        let (w1, _, _) = kernels().unwrap();
        let bound = 0.5 * w1.l2_norm_sq().sqrt();
        let mut sup: f64 = 0.0;
        for f in standard_suite(11).unwrap() {
            sup = sup.max(boundedness_ratio(&f).unwrap());
        }
        assert!(sup <= bound + 1e-8, "sup ratio {sup} vs bound {bound}");
        let f1 = TestFunction::from_hermite(1).unwrap();
        assert!(boundedness_ratio(&f1).unwrap() < 1e-12);
        let f0 = TestFunction::from_hermite(0).unwrap();
        assert!(boundedness_ratio(&f0).unwrap() > 0.0);
    }

    #[test]
    fn integration_by_parts_identity_on_compact_bumps() {
        // ⟨Af, w⟩ = ½f'(0)[w(+0)-w(-0)] + ½f(0)[w'(-0)-w'(+0)]
        let mut rng = SplitMix64(42);
        let (w1, w2, _) = kernels().unwrap();
        for _ in 0..20 {
            let c0 = rng.in_range(-1.0, 1.0);
            let c1 = rng.in_range(-1.0, 1.0);
            let c2 = rng.in_range(-1.0, 1.0);
            let r = rng.in_range(2.0, 5.0);
            let f = bump_test_function(c0, c1, c2, r);
            for w in [w1, w2] {
                let lhs = f.af.inner(w).unwrap();
                let rhs = 0.5 * f.dvalue0() * (w.boundary.f_plus.re - w.boundary.f_minus.re)
                    + 0.5 * f.value0() * (w.boundary.df_minus.re - w.boundary.df_plus.re);
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                assert!(
                    (lhs - rhs).abs() / scale < 1e-6,
                    "ibp mismatch: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn perturbation_identity_cases() {
        let qc = qc();
        let f = TestFunction::from_poly_gauss(&PolyGauss::new(vec![(
            Poly(vec![0.5, 0.3, -0.2]),
            0.45,
        )]));
        // smooth g: both jump terms vanish
        let g_smooth = TestFunction::from_hermite(2).unwrap();
        let d = perturbation_identity_check(&g_smooth.f, &f, &qc).unwrap();
        assert!(d < 1e-8, "smooth case discrepancy {d}");
        // value jump only
        let (w1, w2, _) = kernels().unwrap();
        let d = perturbation_identity_check(w2, &f, &qc).unwrap();
        assert!(d < 1e-6, "value-jump case discrepancy {d}");
        // slope jump only
        let d = perturbation_identity_check(w1, &f, &qc).unwrap();
        assert!(d < 1e-6, "slope-jump case discrepancy {d}");
    }

    /// Smooth compactly supported test function `p(t)·exp(-1/(1-(t/r)²))`.
    fn bump_test_function(c0: f64, c1: f64, c2: f64, r: f64) -> TestFunction {
        let p = move |t: f64| c0 + c1 * t + c2 * t * t;
        let dp = move |t: f64| c1 + 2.0 * c2 * t;
        let ddp = move |_t: f64| 2.0 * c2;
        let b = move |t: f64| {
            let x: f64 = t / r;
            if x.abs() < 1.0 {
                (-1.0 / (1.0 - x * x)).exp()
            } else {
                0.0
            }
        };
        let db = move |t: f64| {
            let x = t / r;
            if x.abs() < 1.0 {
                let d = 1.0 - x * x;
                b(t) * (-2.0 * x / (d * d)) / r
            } else {
                0.0
            }
        };
        let ddb = move |t: f64| {
            let x = t / r;
            if x.abs() < 1.0 {
                let d = 1.0 - x * x;
                b(t) * (4.0 * x * x / (d * d * d * d) - 2.0 / (d * d) - 8.0 * x * x / (d * d * d))
                    / (r * r)
            } else {
                0.0
            }
        };
        let f = move |t: f64| p(t) * b(t);
        let df = move |t: f64| dp(t) * b(t) + p(t) * db(t);
        let ddf = move |t: f64| ddp(t) * b(t) + 2.0 * dp(t) * db(t) + p(t) * ddb(t);
        let af = move |t: f64| -0.5 * ddf(t) + 0.5 * t * t * f(t);
        // the image's own derivative samples are not used by the integrals
        let fg = GridFunction::from_smooth(DEFAULT_EXTENT, f, df);
        let ag = GridFunction::from_smooth(DEFAULT_EXTENT, af, |_| 0.0);
        let plus_norm = (fg.l2_norm_sq() + ag.l2_norm_sq()).sqrt();
        TestFunction {
            f: fg,
            af: ag,
            plus_norm,
        }
    }
}
