//! Eigenvalues of the extension families by secular-equation root finding.
//!
//! For each spectral parameter the decaying half-line solutions are built
//! by backward integration and their boundary traces are pushed through the
//! family's boundary conditions. Zeros of the resulting secular function
//! are exactly the eigenvalues:
//!
//! - half-line families: `cos θ y(±0) - sin θ y'(±0)`;
//! - one-parameter family: the product of an even branch
//!   `√2 cos θ y(0) - 2 sin θ y'(0)` (from the even reflection) and the odd
//!   branch `y(0)` (odd reflections exist exactly when the value trace
//!   vanishes, which reproduces the unshifted odd oscillator levels);
//! - four-parameter family: the determinant of the homogeneous 2x2 system
//!   in the two half-line amplitudes. The determinant has constant phase in
//!   the spectral parameter, so scans carry a sign section of its
//!   magnitude with the phase flip detected between consecutive samples.
//!
//! Negative eigenvalues additionally come from the analytic route through
//! the decay integral: `λ = -ω²` is an eigenvalue of the one-parameter
//! family at `θ` exactly when `tan θ = -G(ω)/√2`, and `G` is strictly
//! decreasing, so the inversion brackets monotonically.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extensions::Extension;
use crate::grid::{GridFunction, Side};
use crate::ode;
use crate::quad::QuadratureConfig;
use crate::series;

/// How an eigenvalue was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    SecularRoot,
    GOmegaInversion,
    AnalyticKnown,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::SecularRoot => "secular_root",
            Method::GOmegaInversion => "g_omega_inversion",
            Method::AnalyticKnown => "analytic_known",
        };
        f.write_str(s)
    }
}

/// One located eigenvalue. Eigenvalues of these families are simple, so the
/// multiplicity field is structurally 1.
#[derive(Debug, Clone, Copy)]
pub struct EigenResult {
    pub lambda: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub method: Method,
    pub multiplicity: u32,
}

/// One secular-function sample.
#[derive(Debug, Clone)]
pub struct SecularSample {
    pub lambda: f64,
    /// Signed real section of the secular function. For the four-parameter
    /// family this is the real part of the (constant-phase) determinant.
    pub det_value: f64,
    /// Magnitude of the secular function; root detection for the
    /// four-parameter family runs on this.
    pub det_magnitude: f64,
    /// Boundary directions `(y(0), y'(0))` entering the condition, one per
    /// half-line solution used.
    pub boundary_dir: Vec<(f64, f64)>,
}

const DEFAULT_ODE_TOL: f64 = 1e-9;
/// Default scan resolution in the spectral parameter.
pub const DEFAULT_SCAN_STEP: f64 = 0.05;

/// Factor values of the secular function at `lambda`. Real families produce
/// one or two real factors; the four-parameter family yields one complex
/// determinant.
enum FactorValues {
    Real(Vec<f64>, Vec<(f64, f64)>),
    Complex(Complex64, Vec<(f64, f64)>),
}

fn factor_values(ext: &Extension, lambda: f64, tol: f64) -> Result<FactorValues> {
    match *ext {
        Extension::HalfLinePlus { theta } => {
            let (v0, d0) = ode::boundary_direction(lambda, Side::Plus, tol)?;
            Ok(FactorValues::Real(
                vec![theta.cos() * v0 - theta.sin() * d0],
                vec![(v0, d0)],
            ))
        }
        Extension::HalfLineMinus { theta } => {
            let (v0, d0) = ode::boundary_direction(lambda, Side::Minus, tol)?;
            Ok(FactorValues::Real(
                vec![theta.cos() * v0 - theta.sin() * d0],
                vec![(v0, d0)],
            ))
        }
        Extension::BTheta { theta } => {
            let (v0, d0) = ode::boundary_direction(lambda, Side::Plus, tol)?;
            // even reflection: f(0) = y(0), f'(±0) = ±y'(0)
            let even = std::f64::consts::SQRT_2 * theta.cos() * v0 - 2.0 * theta.sin() * d0;
            // odd reflection exists iff y(0) = 0
            let odd = v0;
            Ok(FactorValues::Real(vec![even, odd], vec![(v0, d0)]))
        }
        Extension::CK { .. } => {
            let k = ext.k_matrix().expect("CK carries a matrix");
            let rows = k.condition_rows();
            let (vm, dm) = ode::boundary_direction(lambda, Side::Minus, tol)?;
            let (vp, dp) = ode::boundary_direction(lambda, Side::Plus, tol)?;
            let cm = |x: f64| Complex64::new(x, 0.0);
            // columns: coefficients of the minus and plus amplitudes
            let n11 = rows[0][0] * cm(vm) + rows[0][1] * cm(dm);
            let n12 = rows[0][2] * cm(vp) + rows[0][3] * cm(dp);
            let n21 = rows[1][0] * cm(vm) + rows[1][1] * cm(dm);
            let n22 = rows[1][2] * cm(vp) + rows[1][3] * cm(dp);
            let det = n11 * n22 - n12 * n21;
            Ok(FactorValues::Complex(det, vec![(vm, dm), (vp, dp)]))
        }
    }
}

/// Evaluate the secular function of `ext` at `lambda`.
pub fn secular(ext: &Extension, lambda: f64) -> Result<SecularSample> {
    secular_with_tol(ext, lambda, DEFAULT_ODE_TOL)
}

pub fn secular_with_tol(ext: &Extension, lambda: f64, tol: f64) -> Result<SecularSample> {
    match factor_values(ext, lambda, tol)? {
        FactorValues::Real(factors, dirs) => {
            let det: f64 = factors.iter().product();
            Ok(SecularSample {
                lambda,
                det_value: det,
                det_magnitude: det.abs(),
                boundary_dir: dirs,
            })
        }
        FactorValues::Complex(det, dirs) => Ok(SecularSample {
            lambda,
            det_value: det.re,
            det_magnitude: det.norm(),
            boundary_dir: dirs,
        }),
    }
}

/// All eigenvalues in `[lo, hi]` at the default scan resolution.
pub fn eigenvalues_in(
    ext: &Extension,
    lo: f64,
    hi: f64,
    max_count: usize,
    tol: f64,
) -> Result<Vec<EigenResult>> {
    eigenvalues_in_with_step(ext, lo, hi, max_count, tol, DEFAULT_SCAN_STEP)
}

/// As [`eigenvalues_in`] with an explicit scan step. Coarser steps are safe
/// when roots are known to be isolated (negative windows hold at most one).
pub fn eigenvalues_in_with_step(
    ext: &Extension,
    lo: f64,
    hi: f64,
    max_count: usize,
    tol: f64,
    step: f64,
) -> Result<Vec<EigenResult>> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] is empty")));
    }
    if !(tol > 0.0) || !(step > 0.0) {
        return Err(Error::InvalidArgument("tol and step must be positive".into()));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();

    let mut roots: Vec<EigenResult> = Vec::new();
    match factor_values(ext, grid[0], DEFAULT_ODE_TOL)? {
        FactorValues::Real(first, _) => {
            let n_factors = first.len();
            // sample all factors along the grid
            let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); n_factors];
            for (i, f) in first.iter().enumerate() {
                samples[i].push(*f);
            }
            for &l in &grid[1..] {
                match factor_values(ext, l, DEFAULT_ODE_TOL)? {
                    FactorValues::Real(fs, _) => {
                        for (i, f) in fs.iter().enumerate() {
                            samples[i].push(*f);
                        }
                    }
                    FactorValues::Complex(..) => unreachable!(),
                }
            }
            for (fi, series_vals) in samples.iter().enumerate() {
                for w in 0..grid.len() - 1 {
                    let (a, b) = (grid[w], grid[w + 1]);
                    let (fa, fb) = (series_vals[w], series_vals[w + 1]);
                    if fa == 0.0 {
                        // grid point lands on a root; refine a tight window
                        if w == 0 || series_vals[w - 1] * fb < 0.0 {
                            // handled by the surrounding bracket
                        }
                    }
                    if fa * fb < 0.0 {
                        let eval = |l: f64| -> Result<f64> {
                            match factor_values(ext, l, DEFAULT_ODE_TOL / 10.0)? {
                                FactorValues::Real(fs, _) => Ok(fs[fi]),
                                FactorValues::Complex(..) => unreachable!(),
                            }
                        };
                        let root = refine_real_root(&eval, a, b, fa, fb, tol)?;
                        let sample = secular_with_tol(ext, root.lambda, DEFAULT_ODE_TOL / 10.0)?;
                        roots.push(EigenResult {
                            residual: sample.det_magnitude,
                            ..root
                        });
                    }
                }
            }
        }
        FactorValues::Complex(first, _) => {
            // sign-carrying real section along the scan
            let mut dets: Vec<Complex64> = Vec::with_capacity(grid.len());
            dets.push(first);
            for &l in &grid[1..] {
                match factor_values(ext, l, DEFAULT_ODE_TOL)? {
                    FactorValues::Complex(d, _) => dets.push(d),
                    FactorValues::Real(..) => unreachable!(),
                }
            }
            let mut sign = 1.0f64;
            let mut section: Vec<f64> = Vec::with_capacity(dets.len());
            section.push(sign * dets[0].norm());
            for w in 1..dets.len() {
                if (dets[w] * dets[w - 1].conj()).re < 0.0 {
                    sign = -sign;
                }
                section.push(sign * dets[w].norm());
            }
            for w in 0..grid.len() - 1 {
                let (a, b) = (grid[w], grid[w + 1]);
                let (fa, fb) = (section[w], section[w + 1]);
                if fa * fb < 0.0 {
                    let ref_det = dets[w];
                    let ref_sign = section[w].signum();
                    let eval = |l: f64| -> Result<f64> {
                        match factor_values(ext, l, DEFAULT_ODE_TOL / 10.0)? {
                            FactorValues::Complex(d, _) => {
                                let s = if (d * ref_det.conj()).re < 0.0 { -ref_sign } else { ref_sign };
                                Ok(s * d.norm())
                            }
                            FactorValues::Real(..) => unreachable!(),
                        }
                    };
                    let root = refine_real_root(&eval, a, b, fa, fb, tol)?;
                    let sample = secular_with_tol(ext, root.lambda, DEFAULT_ODE_TOL / 10.0)?;
                    roots.push(EigenResult {
                        residual: sample.det_magnitude,
                        ..root
                    });
                }
            }
        }
    }

    roots.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    // merge coincident roots found through different factors
    let mut merged: Vec<EigenResult> = Vec::new();
    for r in roots {
        match merged.last() {
            Some(prev) if (r.lambda - prev.lambda).abs() <= (2.0 * tol).max(1e-12) => {
                if r.residual < prev.residual {
                    *merged.last_mut().unwrap() = r;
                }
            }
            _ => merged.push(r),
        }
    }
    for w in merged.windows(2) {
        if w[1].lambda - w[0].lambda < step {
            log::warn!(
                "eigenvalues {:.6} and {:.6} are closer than the scan step {step}; decrease the step",
                w[0].lambda,
                w[1].lambda
            );
        }
    }
    if merged.len() > max_count {
        log::warn!("truncating {} roots to max_count = {max_count}", merged.len());
        merged.truncate(max_count);
    }
    Ok(merged)
}

/// Bisection to width `tol` followed by one guarded secant polish.
fn refine_real_root(
    eval: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> Result<EigenResult> {
    debug_assert!(fa * fb < 0.0);
    let bracket = (a, b);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = eval(mid)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            fa = 0.0;
            fb = 0.0;
            break;
        }
        if fa * fm < 0.0 {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let mut lambda = 0.5 * (a + b);
    if fb != fa {
        let secant = b - fb * (b - a) / (fb - fa);
        if secant > bracket.0 && secant < bracket.1 {
            lambda = secant;
        }
    }
    Ok(EigenResult {
        lambda,
        residual: f64::NAN, // filled by the caller from a fresh sample
        bracket,
        method: Method::SecularRoot,
        multiplicity: 1,
    })
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

/// Negative eigenvalue of the one-parameter family at `theta`, if any:
/// none for `θ < π - arctan(G(0)/√2)`, eigenvalue zero exactly at the
/// threshold, otherwise the unique solution of `tan θ = -G(ω)/√2` reported
/// as `λ = -ω²`.
pub fn negative_eigenvalue(
    theta: f64,
    qc: &QuadratureConfig,
    tol: f64,
) -> Result<Option<EigenResult>> {
    crate::extensions::Extension::b_theta(theta)?;
    let alpha = series::alpha_b(qc)?;
    invert_g_threshold(theta, alpha, std::f64::consts::SQRT_2, qc, tol)
}

/// Negative eigenvalue of a half-line family. The plus side solves
/// `tan θ = -G(ω)`; the minus side is its reflection image, negative
/// exactly for `θ ∈ (0, arctan G(0))` with eigenvalue zero at the
/// endpoint `θ = arctan G(0)`.
pub fn negative_eigenvalue_halfline(
    theta: f64,
    side: Side,
    qc: &QuadratureConfig,
    tol: f64,
) -> Result<Option<EigenResult>> {
    crate::extensions::Extension::half_line_plus(theta)?;
    let alpha = series::alpha_a(qc)?;
    match side {
        Side::Plus => invert_g_threshold(theta, alpha, 1.0, qc, tol),
        Side::Minus => {
            // reflection: the minus-side family at θ matches the plus side
            // at π - θ (θ = 0 maps to itself and has no negative spectrum)
            if theta == 0.0 {
                return Ok(None);
            }
            invert_g_threshold(std::f64::consts::PI - theta, alpha, 1.0, qc, tol)
        }
    }
}

/// Shared inversion: solves `tan θ = -G(ω)/divisor` for `ω > 0` when
/// `θ ∈ (π - arctan(G(0)/divisor), π)`.
fn invert_g_threshold(
    theta: f64,
    alpha: f64,
    divisor: f64,
    qc: &QuadratureConfig,
    tol: f64,
) -> Result<Option<EigenResult>> {
    let pi = std::f64::consts::PI;
    let threshold = pi - alpha;
    if near(theta, threshold) {
        return Ok(Some(EigenResult {
            lambda: 0.0,
            residual: 0.0,
            bracket: (0.0, 0.0),
            method: Method::AnalyticKnown,
            multiplicity: 1,
        }));
    }
    if theta <= threshold {
        return Ok(None);
    }
    let target = -divisor * theta.tan(); // positive on (π/2, π)
    debug_assert!(target > 0.0);
    let mut lo = 0.0f64;
    let mut hi = series::OMEGA_MAX;
    let g_hi = series::eval_g(hi, qc)?;
    if g_hi > target {
        return Err(Error::OutOfRange(format!(
            "theta = {theta} asks for G(\u{03c9}) = {target:.3e} below G({hi}) = {g_hi:.3e}; \
             the eigenvalue lies outside the certified frequency range"
        )));
    }
    // G is strictly decreasing: plain bisection on ω
    while hi * hi - lo * lo > tol {
        let mid = 0.5 * (lo + hi);
        let g = series::eval_g(mid, qc)?;
        if g > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega = 0.5 * (lo + hi);
    let residual = (series::eval_g(omega, qc)? - target).abs() / target.max(1.0);
    Ok(Some(EigenResult {
        lambda: -omega * omega,
        residual,
        bracket: (-hi * hi, -lo * lo),
        method: Method::GOmegaInversion,
        multiplicity: 1,
    }))
}

/// The parameter `θ(λ)` of the unique member of the one-parameter family
/// having `λ` in its point spectrum through the even reflection.
pub fn theta_for_lambda(lambda: f64, tol: f64) -> Result<f64> {
    let (v0, d0) = ode::boundary_direction(lambda, Side::Plus, tol)?;
    // √2 cos θ v0 = 2 sin θ d0
    let theta = (std::f64::consts::SQRT_2 * v0).atan2(2.0 * d0);
    Ok(if theta < 0.0 { theta + std::f64::consts::PI } else { theta })
}

/// Quadratic-form value `∫ |f'|² + t²|f|²` over one half-line for sampled
/// data vanishing near the origin and near the outer grid end.
pub fn form_positivity(f: &GridFunction, side: Side) -> Result<f64> {
    let (xs, vals): (&[f64], &[f64]) = match side {
        Side::Plus => (&f.xs_pos, &f.vals_pos),
        Side::Minus => (&f.xs_neg, &f.vals_neg),
    };
    if xs.len() < 8 {
        return Err(Error::GridTooCoarse("need at least 8 points".into()));
    }
    let sup = f.sup_norm();
    let edge = 3usize;
    let (near0, far): (Vec<usize>, Vec<usize>) = match side {
        Side::Plus => ((0..edge).collect(), (xs.len() - edge..xs.len()).collect()),
        Side::Minus => ((xs.len() - edge..xs.len()).collect(), (0..edge).collect()),
    };
    for &i in near0.iter().chain(far.iter()) {
        if vals[i].abs() > 1e-10 * sup.max(1.0) {
            return Err(Error::SupportViolation(format!(
                "sample at t = {} is {:.3e}, not vanishing",
                xs[i], vals[i]
            )));
        }
    }
    let (dvals, _) = match side {
        Side::Plus => (&f.dvals_pos, ()),
        Side::Minus => (&f.dvals_neg, ()),
    };
    let h = f.step();
    let integrand: Vec<f64> = xs
        .iter()
        .zip(vals.iter().zip(dvals.iter()))
        .map(|(&x, (&v, &d))| d * d + x * x * v * v)
        .collect();
    Ok(crate::grid::simpson_uniform(&integrand, h))
}
