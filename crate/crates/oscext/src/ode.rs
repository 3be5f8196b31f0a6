//! The square-integrable solution of `-y''/2 + t²y/2 = λy` on a half-line.
//!
//! For every real `λ` exactly one solution direction decays at infinity.
//! It is produced by integrating backward from an abscissa `T` beyond the
//! turning point `t² = 2λ`, seeded with the decaying Liouville-Green
//! direction `y'/y = -√(T² - 2λ)`. Backward integration amplifies the
//! decaying solution relative to the growing one, so seed inaccuracies die
//! off exponentially and only the margin built into `T` matters. The
//! returned object carries the boundary traces at the origin, normalized to
//! sup-norm one over the integration range; only the projective direction
//! `(y(0) : y'(0))` is meaningful.

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, GridFunction, Side, DEFAULT_EXTENT, DEFAULT_STEP};

/// Decaying half-line solution with boundary data at the origin.
#[derive(Debug, Clone)]
pub struct L2Solution {
    pub lambda: f64,
    pub side: Side,
    /// Seeding abscissa for the backward integration.
    pub start_t: f64,
    /// `y(±0)` after sup-norm normalization.
    pub value0: f64,
    /// `y'(±0)` after sup-norm normalization.
    pub dvalue0: f64,
    /// Tabulation on the default lattice restricted to the integration
    /// range; absent when only boundary data was requested.
    pub samples: Option<GridFunction>,
    /// Sup norm of the raw integrated solution, the factor divided out.
    pub scale: f64,
}

/// Default seeding abscissa: past the turning point with margin.
pub fn default_start_t(lambda: f64) -> f64 {
    (2.0 * lambda.max(0.0) + 1.0).sqrt() + 6.0
}

/// Dormand-Prince 5(4) step for a two-component system.
struct Dp45;

impl Dp45 {
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
}

/// One adaptive DP45 step from `(t, y)` with proposed step `h` (signed).
/// Returns `(t_new, y_new, err_norm, k7)`.
fn dp45_step(
    rhs: &impl Fn(f64, [f64; 2]) -> [f64; 2],
    t: f64,
    y: [f64; 2],
    h: f64,
    k1: [f64; 2],
) -> (f64, [f64; 2], f64, [f64; 2]) {
    let mut k = [[0.0f64; 2]; 7];
    k[0] = k1;
    for s in 0..6 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s + 1) {
            let a = Dp45::A[s][j];
            if a != 0.0 {
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
        }
        k[s + 1] = rhs(t + Dp45::C[s] * h, ys);
    }
    // 5th-order solution uses the last A row (FSAL layout)
    let mut y5 = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let a = Dp45::A[5][j];
        if a != 0.0 {
            y5[0] += h * a * kj[0];
            y5[1] += h * a * kj[1];
        }
    }
    let mut y4 = y;
    for (j, kj) in k.iter().enumerate() {
        let b = Dp45::B4[j];
        if b != 0.0 {
            y4[0] += h * b * kj[0];
            y4[1] += h * b * kj[1];
        }
    }
    let scale0 = y5[0].abs().max(y[0].abs()).max(1e-30);
    let scale1 = y5[1].abs().max(y[1].abs()).max(1e-30);
    let err = ((y5[0] - y4[0]) / scale0).abs().max(((y5[1] - y4[1]) / scale1).abs());
    (t + h, y5, err, k[6])
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t_end` (either direction) with
/// local relative error `tol`, invoking `record` after every accepted step.
pub(crate) fn integrate_adaptive(
    rhs: impl Fn(f64, [f64; 2]) -> [f64; 2],
    t0: f64,
    t_end: f64,
    y0: [f64; 2],
    tol: f64,
    mut max_abs_step: f64,
    mut record: impl FnMut(f64, [f64; 2]),
) -> Result<[f64; 2]> {
    let dir = if t_end > t0 { 1.0 } else { -1.0 };
    if max_abs_step <= 0.0 {
        max_abs_step = (t_end - t0).abs();
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * max_abs_step.min(1e-2);
    let mut k1 = rhs(t, y);
    let mut steps = 0usize;
    while (t_end - t) * dir > 0.0 {
        if h.abs() > (t_end - t).abs() {
            h = t_end - t;
        }
        let (t_new, y_new, err, k7) = dp45_step(&rhs, t, y, h, k1);
        if err <= tol {
            t = t_new;
            y = y_new;
            k1 = k7;
            record(t, y);
            if !y[0].is_finite() || !y[1].is_finite() {
                return Err(Error::OdeFailure(format!("state not finite at t = {t}")));
            }
            if y[0].abs().max(y[1].abs()) > 1e250 {
                return Err(Error::Overflow(format!("solution magnitude beyond 1e250 at t = {t}")));
            }
        }
        // standard step-size controller, order 5
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < 1e-14 {
            return Err(Error::OdeFailure(format!("step size underflow at t = {t}")));
        }
        if h.abs() > max_abs_step {
            h = dir * max_abs_step;
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::OdeFailure("step budget exhausted".into()));
        }
    }
    Ok(y)
}

fn build_plus_side(lambda: f64, tol: f64, tabulate: bool) -> Result<L2Solution> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let start_t = default_start_t(lambda);
    if start_t * start_t <= 2.0 * lambda {
        return Err(Error::OdeFailure(
            "seeding abscissa does not clear the turning point".into(),
        ));
    }
    let rhs = move |t: f64, y: [f64; 2]| [y[1], (t * t - 2.0 * lambda) * y[0]];
    let seed_slope = -(start_t * start_t - 2.0 * lambda).sqrt();
    let y0 = [1.0, seed_slope];

    let mut sup: f64 = 1.0;
    let mut trail: Vec<(f64, [f64; 2])> = Vec::new();
    let local_tol = tol / 10.0;
    let max_step = if tabulate { DEFAULT_STEP } else { 0.25 };
    let y_end = integrate_adaptive(
        rhs,
        start_t,
        0.0,
        y0,
        local_tol,
        max_step,
        |t, y| {
            sup = sup.max(y[0].abs());
            if tabulate {
                trail.push((t, y));
            }
        },
    )?;
    if y_end[0] == 0.0 && y_end[1] == 0.0 {
        return Err(Error::OdeFailure("vanishing boundary data".into()));
    }

    let samples = if tabulate {
        // keep lattice points only: max_step = lattice step and the
        // controller may not land exactly on lattice abscissas, so resample
        // by cubic Hermite interpolation between recorded states
        Some(tabulate_lattice(&trail, start_t, y_end, sup, lambda)?)
    } else {
        None
    };

    Ok(L2Solution {
        lambda,
        side: Side::Plus,
        start_t,
        value0: y_end[0] / sup,
        dvalue0: y_end[1] / sup,
        samples,
        scale: sup,
    })
}

/// Cubic Hermite resampling of the recorded trail onto the default lattice.
fn tabulate_lattice(
    trail: &[(f64, [f64; 2])],
    start_t: f64,
    y_end: [f64; 2],
    sup: f64,
    lambda: f64,
) -> Result<GridFunction> {
    let extent = DEFAULT_EXTENT.min(start_t);
    let n = (extent / DEFAULT_STEP).floor() as i64;
    let mut xs = Vec::with_capacity(n as usize);
    for k in 1..=n {
        xs.push(k as f64 * DEFAULT_STEP);
    }
    // trail is ordered by decreasing t; flip for interpolation
    let mut pts: Vec<(f64, [f64; 2])> = trail.iter().rev().cloned().collect();
    pts.insert(0, (0.0, y_end));
    let mut vals = Vec::with_capacity(xs.len());
    let mut dvals = Vec::with_capacity(xs.len());
    let mut cursor = 0usize;
    let rhs = |t: f64, y: [f64; 2]| [y[1], (t * t - 2.0 * lambda) * y[0]];
    for &x in &xs {
        while cursor + 1 < pts.len() && pts[cursor + 1].0 < x {
            cursor += 1;
        }
        if cursor + 1 >= pts.len() {
            break;
        }
        let (t0, y0) = pts[cursor];
        let (t1, y1) = pts[cursor + 1];
        let h = t1 - t0;
        if h <= 0.0 {
            return Err(Error::OdeFailure("non-monotone integration trail".into()));
        }
        let s = (x - t0) / h;
        let d0 = rhs(t0, y0);
        let d1 = rhs(t1, y1);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = h00 * y0[0] + h10 * h * d0[0] + h01 * y1[0] + h11 * h * d1[0];
        let dv = h00 * y0[1] + h10 * h * d0[1] + h01 * y1[1] + h11 * h * d1[1];
        vals.push(v / sup);
        dvals.push(dv / sup);
    }
    xs.truncate(vals.len());
    let b = BoundaryData::from_real(y_end[0] / sup, y_end[1] / sup, y_end[0] / sup, y_end[1] / sup);
    GridFunction::from_parts(Vec::new(), Vec::new(), Vec::new(), xs, vals, dvals, b)
}

/// Build the decaying solution on the requested side, tabulated on the
/// default lattice. The minus side is obtained from the reflected problem:
/// the differential expression is even, so `y_-(t) = z(-t)` with `z` the
/// plus-side solution, flipping the sign of the derivative trace.
pub fn build_l2_solution(lambda: f64, side: Side, tol: f64) -> Result<L2Solution> {
    let plus = build_plus_side(lambda, tol, true)?;
    Ok(match side {
        Side::Plus => plus,
        Side::Minus => reflect_to_minus(plus),
    })
}

/// Boundary direction only, skipping tabulation (used in spectral scans).
pub fn boundary_direction(lambda: f64, side: Side, tol: f64) -> Result<(f64, f64)> {
    let plus = build_plus_side(lambda, tol, false)?;
    Ok(match side {
        Side::Plus => (plus.value0, plus.dvalue0),
        Side::Minus => (plus.value0, -plus.dvalue0),
    })
}

fn reflect_to_minus(plus: L2Solution) -> L2Solution {
    let samples = plus.samples.map(|g| {
        let xs_neg: Vec<f64> = g.xs_pos.iter().rev().map(|&x| -x).collect();
        let vals_neg: Vec<f64> = g.vals_pos.iter().rev().cloned().collect();
        let dvals_neg: Vec<f64> = g.dvals_pos.iter().rev().map(|&d| -d).collect();
        let b = BoundaryData::from_real(
            g.boundary.f_plus.re,
            -g.boundary.df_plus.re,
            g.boundary.f_plus.re,
            -g.boundary.df_plus.re,
        );
        GridFunction::from_parts(xs_neg, vals_neg, dvals_neg, Vec::new(), Vec::new(), Vec::new(), b)
            .expect("reflected lattice is valid")
    });
    L2Solution {
        lambda: plus.lambda,
        side: Side::Minus,
        start_t: plus.start_t,
        value0: plus.value0,
        dvalue0: -plus.dvalue0,
        samples,
        scale: plus.scale,
    }
}

/// Even reflection of a plus-side solution onto the whole line:
/// `y(x) = y_+(|x|)`. Continuous at the origin with derivative jump
/// `y'(+0) - y'(-0) = 2 y'(+0)`.
pub fn mirror_extend(y: &L2Solution) -> Result<GridFunction> {
    if y.side != Side::Plus {
        return Err(Error::InvalidArgument("mirror_extend needs a plus-side solution".into()));
    }
    let g = y
        .samples
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("solution carries no tabulation".into()))?;
    let xs_neg: Vec<f64> = g.xs_pos.iter().rev().map(|&x| -x).collect();
    let vals_neg: Vec<f64> = g.vals_pos.iter().rev().cloned().collect();
    let dvals_neg: Vec<f64> = g.dvals_pos.iter().rev().map(|&d| -d).collect();
    let b = BoundaryData::from_real(y.value0, -y.dvalue0, y.value0, y.dvalue0);
    GridFunction::from_parts(
        xs_neg,
        vals_neg,
        dvals_neg,
        g.xs_pos.clone(),
        g.vals_pos.clone(),
        g.dvals_pos.clone(),
        b,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadratureConfig;
    use crate::series;
    use approx::assert_relative_eq;

    fn direction_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
        // sine of the angle between two projective directions
        let na = (a.0 * a.0 + a.1 * a.1).sqrt();
        let nb = (b.0 * b.0 + b.1 * b.1).sqrt();
        ((a.0 * b.1 - a.1 * b.0) / (na * nb)).abs()
    }

    #[test]
    fn integrator_reproduces_trigonometric_flow() {
        // y'' = -y from 0 to pi: (sin, cos) -> (0, -1)
        let y = integrate_adaptive(
            |_t, y| [y[1], -y[0]],
            0.0,
            std::f64::consts::PI,
            [0.0, 1.0],
            1e-11,
            0.1,
            |_, _| {},
        )
        .unwrap();
        assert!((y[0] - 0.0).abs() < 1e-9);
        assert!((y[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn ground_state_direction_at_positive_energy() {
        // λ = 1/2: the decaying solution is the Gaussian, slope zero at 0
        let sol = build_l2_solution(0.5, Side::Plus, 1e-9).unwrap();
        assert!((sol.dvalue0 / sol.value0).abs() < 1e-8);
        // λ = 3/2: first excited state, value zero at 0
        let sol = build_l2_solution(1.5, Side::Plus, 1e-9).unwrap();
        assert!((sol.value0 / sol.dvalue0).abs() < 1e-8);
    }

    #[test]
    fn kernel_direction_at_minus_half() {
        // λ = -1/2: direction must match (φ_+(0) : φ_+'(0)) = (√π/2 : -1)
        let sol = build_l2_solution(-0.5, Side::Plus, 1e-10).unwrap();
        let expected = (std::f64::consts::PI.sqrt() / 2.0, -1.0);
        assert!(
            direction_gap((sol.value0, sol.dvalue0), expected) < 1e-9,
            "direction ({}, {})",
            sol.value0,
            sol.dvalue0
        );
    }

    #[test]
    fn matches_the_series_solution_at_negative_energies() {
        let qc = QuadratureConfig::default();
        for omega in [0.25, 0.5, 1.0, 2.0] {
            let lambda = -omega * omega;
            let (v0, d0) = boundary_direction(lambda, Side::Plus, 1e-10).unwrap();
            let g = series::eval_g(omega, &qc).unwrap();
            // (v0 : d0) proportional to (G(ω) : -1)
            assert!(
                direction_gap((v0, d0), (g, -1.0)) < 1e-6,
                "omega={omega}: ({v0}, {d0}) vs ({g}, -1)"
            );
            assert_relative_eq!(d0 / v0, -1.0 / g, max_relative = 1e-6);
        }
    }

    #[test]
    fn projective_direction_is_stable_under_longer_runs() {
        for lambda in [-2.0, 0.0, 0.7, 3.3] {
            let base = build_plus_side(lambda, 1e-10, false).unwrap();
            // re-run with the seeding abscissa pushed out 25%
            let start = default_start_t(lambda) * 1.25;
            let rhs = move |t: f64, y: [f64; 2]| [y[1], (t * t - 2.0 * lambda) * y[0]];
            let seed = [1.0, -(start * start - 2.0 * lambda).sqrt()];
            let far = integrate_adaptive(rhs, start, 0.0, seed, 1e-11, 0.25, |_, _| {}).unwrap();
            let gap = direction_gap((base.value0, base.dvalue0), (far[0], far[1]));
            assert!(gap < 1e-8, "lambda={lambda}: gap {gap:.2e}");
        }
    }

    #[test]
    fn minus_side_is_the_reflection() {
        let plus = build_l2_solution(0.9, Side::Plus, 1e-9).unwrap();
        let minus = build_l2_solution(0.9, Side::Minus, 1e-9).unwrap();
        assert_relative_eq!(plus.value0, minus.value0);
        assert_relative_eq!(plus.dvalue0, -minus.dvalue0);
        let g = minus.samples.as_ref().unwrap();
        assert!(g.xs_pos.is_empty());
        assert!(g.xs_neg.last().unwrap() < &0.0);
    }

    #[test]
    fn tabulation_tracks_the_solution() {
        let sol = build_l2_solution(-1.0, Side::Plus, 1e-10).unwrap();
        let g = sol.samples.as_ref().unwrap();
        // ODE residual along samples by finite differences on the lattice
        let h = DEFAULT_STEP;
        let v = &g.vals_pos;
        let mut worst: f64 = 0.0;
        for i in (2..v.len() - 2).step_by(101) {
            let t = g.xs_pos[i];
            let upp = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2])
                / (12.0 * h * h);
            let res = -0.5 * upp + 0.5 * t * t * v[i] + 1.0 * v[i];
            worst = worst.max(res.abs());
        }
        assert!(worst < 1e-7, "worst residual {worst:.2e}");
        // decay beyond the turning point
        let at = |x: f64| {
            let i = (x / h).round() as usize - 1;
            v[i].abs()
        };
        assert!(at(6.5) <= at(3.25));
        // derivative samples consistent with value samples
        let mut worst_d: f64 = 0.0;
        for i in (2..v.len() - 2).step_by(97) {
            let num = (8.0 * (v[i + 1] - v[i - 1]) - (v[i + 2] - v[i - 2])) / (12.0 * h);
            worst_d = worst_d.max((num - g.dvals_pos[i]).abs());
        }
        assert!(worst_d < 1e-7, "worst derivative mismatch {worst_d:.2e}");
    }

    #[test]
    fn mirror_extension_is_even_with_odd_derivative() {
        let sol = build_l2_solution(1.5, Side::Plus, 1e-9).unwrap();
        let m = mirror_extend(&sol).unwrap();
        assert_relative_eq!(m.boundary.f_plus.re, m.boundary.f_minus.re);
        assert_relative_eq!(m.boundary.df_plus.re, -m.boundary.df_minus.re);
        let jump = m.boundary.df_plus.re - m.boundary.df_minus.re;
        assert_relative_eq!(jump, 2.0 * sol.dvalue0, max_relative = 1e-12);
        let n = m.xs_pos.len();
        for i in (0..n).step_by(503) {
            assert_relative_eq!(m.vals_pos[i], m.vals_neg[n - 1 - i]);
        }
    }

    #[test]
    fn boundary_direction_is_one_dimensional() {
        // two different tolerances land on the same projective point
        for lambda in [-3.0, 0.2, 2.6] {
            let a = boundary_direction(lambda, Side::Plus, 1e-8).unwrap();
            let b = boundary_direction(lambda, Side::Plus, 1e-11).unwrap();
            assert!(direction_gap(a, b) < 1e-7);
        }
    }
}
