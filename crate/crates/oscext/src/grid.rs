//! Two-sided sampled functions with one-sided traces at the origin.
//!
//! Everything downstream of the extension families lives on functions that
//! are smooth on each open half-line but may jump (in value or slope) at 0,
//! so the origin is never a sample point: its one-sided limits are carried
//! separately in [`BoundaryData`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which half-line an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// The trace quadruple `(f(-0), f'(-0), f(+0), f'(+0))`.
///
/// Complex-valued because the neutrality classification of the extension
/// families runs over C even though eigenfunction work is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub f_minus: Complex64,
    pub df_minus: Complex64,
    pub f_plus: Complex64,
    pub df_plus: Complex64,
}

impl BoundaryData {
    pub fn new(f_minus: Complex64, df_minus: Complex64, f_plus: Complex64, df_plus: Complex64) -> Self {
        BoundaryData {
            f_minus,
            df_minus,
            f_plus,
            df_plus,
        }
    }

    pub fn from_real(f_minus: f64, df_minus: f64, f_plus: f64, df_plus: f64) -> Self {
        BoundaryData {
            f_minus: Complex64::new(f_minus, 0.0),
            df_minus: Complex64::new(df_minus, 0.0),
            f_plus: Complex64::new(f_plus, 0.0),
            df_plus: Complex64::new(df_plus, 0.0),
        }
    }

    /// Euclidean norm of the quadruple, used to scale residuals.
    pub fn norm(&self) -> f64 {
        (self.f_minus.norm_sqr()
            + self.df_minus.norm_sqr()
            + self.f_plus.norm_sqr()
            + self.df_plus.norm_sqr())
        .sqrt()
    }

    /// Trace vector in the order `(f(-0), f'(-0), f(+0), f'(+0))`.
    pub fn as_vector(&self) -> [Complex64; 4] {
        [self.f_minus, self.df_minus, self.f_plus, self.df_plus]
    }
}

/// Default lattice step: 1/512.
pub const DEFAULT_STEP: f64 = 1.0 / 512.0;
/// Default lattice extent: samples cover `[-12, 12]` minus the origin.
pub const DEFAULT_EXTENT: f64 = 12.0;

/// A real function sampled on a uniform lattice on each half-line, with
/// first-derivative samples and boundary traces. The origin is excluded
/// from the lattice; `boundary` holds the one-sided limits.
#[derive(Debug, Clone)]
pub struct GridFunction {
    /// Strictly increasing, all negative.
    pub xs_neg: Vec<f64>,
    pub vals_neg: Vec<f64>,
    pub dvals_neg: Vec<f64>,
    /// Strictly increasing, all positive.
    pub xs_pos: Vec<f64>,
    pub vals_pos: Vec<f64>,
    pub dvals_pos: Vec<f64>,
    pub boundary: BoundaryData,
}

impl GridFunction {
    /// Sample a smooth function (continuous with continuous derivative at 0)
    /// on the default lattice over `[-extent, extent]`.
    pub fn from_smooth(extent: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> GridFunction {
        let n = (extent / DEFAULT_STEP).round() as i64;
        let mut xs_pos = Vec::with_capacity(n as usize);
        for k in 1..=n {
            xs_pos.push(k as f64 * DEFAULT_STEP);
        }
        let xs_neg: Vec<f64> = xs_pos.iter().rev().map(|&x| -x).collect();
        let vals_pos: Vec<f64> = xs_pos.iter().map(|&x| f(x)).collect();
        let dvals_pos: Vec<f64> = xs_pos.iter().map(|&x| df(x)).collect();
        let vals_neg: Vec<f64> = xs_neg.iter().map(|&x| f(x)).collect();
        let dvals_neg: Vec<f64> = xs_neg.iter().map(|&x| df(x)).collect();
        let f0 = f(0.0);
        let d0 = df(0.0);
        GridFunction {
            xs_neg,
            vals_neg,
            dvals_neg,
            xs_pos,
            vals_pos,
            dvals_pos,
            boundary: BoundaryData::from_real(f0, d0, f0, d0),
        }
    }

    /// Assemble from explicit parts, checking lattice shape.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        xs_neg: Vec<f64>,
        vals_neg: Vec<f64>,
        dvals_neg: Vec<f64>,
        xs_pos: Vec<f64>,
        vals_pos: Vec<f64>,
        dvals_pos: Vec<f64>,
        boundary: BoundaryData,
    ) -> Result<GridFunction> {
        if xs_neg.len() != vals_neg.len() || xs_neg.len() != dvals_neg.len() {
            return Err(Error::InvalidArgument("negative-side length mismatch".into()));
        }
        if xs_pos.len() != vals_pos.len() || xs_pos.len() != dvals_pos.len() {
            return Err(Error::InvalidArgument("positive-side length mismatch".into()));
        }
        if xs_neg.windows(2).any(|w| w[0] >= w[1]) || xs_pos.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        if xs_neg.last().is_some_and(|&x| x >= 0.0) || xs_pos.first().is_some_and(|&x| x <= 0.0) {
            return Err(Error::InvalidArgument("origin must be excluded from the grid".into()));
        }
        Ok(GridFunction {
            xs_neg,
            vals_neg,
            dvals_neg,
            xs_pos,
            vals_pos,
            dvals_pos,
            boundary,
        })
    }

    pub fn step(&self) -> f64 {
        if self.xs_pos.len() > 1 {
            self.xs_pos[1] - self.xs_pos[0]
        } else if self.xs_neg.len() > 1 {
            self.xs_neg[1] - self.xs_neg[0]
        } else {
            DEFAULT_STEP
        }
    }

    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for v in self.vals_neg.iter().chain(self.vals_pos.iter()) {
            m = m.max(v.abs());
        }
        m.max(self.boundary.f_minus.norm())
            .max(self.boundary.f_plus.norm())
    }

    fn side_points(&self, side: Side) -> (Vec<f64>, f64) {
        // returns samples including the origin trace, ordered away from 0,
        // plus the lattice step
        match side {
            Side::Plus => {
                let mut v = vec![self.boundary.f_plus.re];
                v.extend_from_slice(&self.vals_pos);
                (v, self.step())
            }
            Side::Minus => {
                let mut v = vec![self.boundary.f_minus.re];
                v.extend(self.vals_neg.iter().rev());
                (v, self.step())
            }
        }
    }

    /// Integrate `weight(x, f(x))` over one closed half-line by composite
    /// Simpson on the uniform lattice (3/8 rule on a ragged tail).
    pub fn integrate_side(&self, side: Side, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let (xs, vals): (Vec<f64>, Vec<f64>) = match side {
            Side::Plus => {
                let mut xs = vec![0.0];
                xs.extend_from_slice(&self.xs_pos);
                let mut vs = vec![self.boundary.f_plus.re];
                vs.extend_from_slice(&self.vals_pos);
                (xs, vs)
            }
            Side::Minus => {
                let mut xs: Vec<f64> = self.xs_neg.clone();
                xs.push(0.0);
                let mut vs = self.vals_neg.clone();
                vs.push(self.boundary.f_minus.re);
                (xs, vs)
            }
        };
        let fy: Vec<f64> = xs.iter().zip(vals.iter()).map(|(&x, &v)| weight(x, v)).collect();
        simpson_uniform(&fy, self.step())
    }

    /// `∫ f·g` over the whole line with `g` given analytically.
    pub fn integrate_against(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.integrate_side(Side::Minus, |x, v| v * g(x)) + self.integrate_side(Side::Plus, |x, v| v * g(x))
    }

    /// `∫ f·g` over the whole line for two functions on the same lattice.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.xs_pos.len() != other.xs_pos.len() || self.xs_neg.len() != other.xs_neg.len() {
            return Err(Error::InvalidArgument("grids do not match".into()));
        }
        let prod_side = |a: &[f64], b: &[f64], b0: f64, a0: f64, reversed: bool| {
            let mut fy: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
            if reversed {
                fy.push(a0 * b0);
            } else {
                fy.insert(0, a0 * b0);
            }
            if reversed {
                fy.reverse();
            }
            simpson_uniform(&fy, self.step())
        };
        let pos = prod_side(
            &self.vals_pos,
            &other.vals_pos,
            other.boundary.f_plus.re,
            self.boundary.f_plus.re,
            false,
        );
        let neg = prod_side(
            &self.vals_neg,
            &other.vals_neg,
            other.boundary.f_minus.re,
            self.boundary.f_minus.re,
            true,
        );
        Ok(pos + neg)
    }

    /// Squared L2 norm over the whole line.
    pub fn l2_norm_sq(&self) -> f64 {
        self.integrate_side(Side::Minus, |_, v| v * v) + self.integrate_side(Side::Plus, |_, v| v * v)
    }

    /// Second-derivative samples on one side: fourth-order central stencils
    /// in the interior, boundary-trace-assisted near 0, one-sided at the
    /// outer edge.
    pub fn second_derivative(&self, side: Side) -> Result<Vec<f64>> {
        let (vals, h) = self.side_points(side);
        if vals.len() < 6 {
            return Err(Error::GridTooCoarse(format!(
                "need at least 5 points per side, got {}",
                vals.len() - 1
            )));
        }
        let n = vals.len();
        // vals[0] is the origin trace, vals[1..] the lattice moving outward
        let mut dd = vec![0.0; n - 1];
        for idx in 1..n {
            dd[idx - 1] = if idx >= 2 && idx + 2 <= n - 1 {
                (-vals[idx + 2] + 16.0 * vals[idx + 1] - 30.0 * vals[idx] + 16.0 * vals[idx - 1]
                    - vals[idx - 2])
                    / (12.0 * h * h)
            } else if idx == 1 {
                // offsets (-1, 0, 1, 2, 3), exact through degree four
                (11.0 / 12.0 * vals[0] - 5.0 / 3.0 * vals[1] + 0.5 * vals[2] + vals[3] / 3.0
                    - vals[4] / 12.0)
                    / (h * h)
            } else if idx + 2 == n {
                (11.0 / 12.0 * vals[n - 1] - 5.0 / 3.0 * vals[n - 2] + 0.5 * vals[n - 3]
                    + vals[n - 4] / 3.0
                    - vals[n - 5] / 12.0)
                    / (h * h)
            } else {
                one_sided_dd(
                    vals[n - 1],
                    vals[n - 2],
                    vals[n - 3],
                    vals[n - 4],
                    vals[n - 5],
                    vals[n - 6],
                    h,
                )
            };
        }
        if side == Side::Minus {
            dd.reverse();
        }
        Ok(dd)
    }

    /// One-sided second derivative at the origin trace, fourth order.
    pub fn second_derivative_at_origin(&self, side: Side) -> Result<f64> {
        let (vals, h) = self.side_points(side);
        if vals.len() < 6 {
            return Err(Error::GridTooCoarse("need at least 5 points per side".into()));
        }
        Ok(one_sided_dd(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], h))
    }
}

/// Six-point one-sided second derivative at the first node, fourth order.
fn one_sided_dd(f0: f64, f1: f64, f2: f64, f3: f64, f4: f64, f5: f64, h: f64) -> f64 {
    (45.0 * f0 - 154.0 * f1 + 214.0 * f2 - 156.0 * f3 + 61.0 * f4 - 10.0 * f5) / (12.0 * h * h)
}

/// Composite Simpson on uniformly spaced samples; falls back to the 3/8 rule
/// for the last three panels when the panel count is odd.
pub fn simpson_uniform(fy: &[f64], h: f64) -> f64 {
    let n = fy.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * h * (fy[0] + fy[1]);
    }
    let panels = n - 1;
    let (simpson_panels, tail38) = if panels % 2 == 0 {
        (panels, false)
    } else if panels >= 3 {
        (panels - 3, true)
    } else {
        (0, false)
    };
    let mut acc = 0.0;
    if simpson_panels > 0 {
        acc += fy[0] + fy[simpson_panels];
        for k in 1..simpson_panels {
            acc += fy[k] * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc *= h / 3.0;
    }
    if tail38 {
        let m = simpson_panels;
        acc += 3.0 * h / 8.0 * (fy[m] + 3.0 * fy[m + 1] + 3.0 * fy[m + 2] + fy[m + 3]);
    } else if simpson_panels == 0 && panels == 1 {
        acc = 0.5 * h * (fy[0] + fy[1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smooth_sampling_round_trip() {
        let g = GridFunction::from_smooth(4.0, |t| (-t * t / 2.0).exp(), |t| -t * (-t * t / 2.0).exp());
        assert_eq!(g.xs_pos.len(), 2048);
        assert_eq!(g.xs_neg.len(), 2048);
        assert_relative_eq!(g.boundary.f_plus.re, 1.0);
        assert_relative_eq!(g.boundary.df_plus.re, 0.0);
        assert!(g.xs_neg.last().unwrap() < &0.0);
        assert_relative_eq!(g.sup_norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_matches_known_integrals() {
        let h = 0.001;
        let fy: Vec<f64> = (0..=1000).map(|k| (k as f64 * h).powi(3)).collect();
        assert_relative_eq!(simpson_uniform(&fy, h), 0.25, epsilon = 1e-12);
        // odd panel count goes through the 3/8 tail
        let fy: Vec<f64> = (0..=999).map(|k| (k as f64 * h).sin()).collect();
        let exact = 1.0 - (0.999f64).cos();
        assert_relative_eq!(simpson_uniform(&fy, h), exact, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = GridFunction::from_smooth(12.0, |t| (-t * t / 2.0).exp(), |t| -t * (-t * t / 2.0).exp());
        // ∫ exp(-t²) dt = √π
        assert_relative_eq!(g.l2_norm_sq(), std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn second_derivative_of_gaussian() {
        let g = GridFunction::from_smooth(6.0, |t| (-t * t / 2.0).exp(), |t| -t * (-t * t / 2.0).exp());
        let dd = g.second_derivative(Side::Plus).unwrap();
        for (i, &x) in g.xs_pos.iter().enumerate().step_by(300) {
            let exact = (x * x - 1.0) * (-x * x / 2.0).exp();
            assert_relative_eq!(dd[i], exact, epsilon = 1e-7, max_relative = 1e-6);
        }
        let at0 = g.second_derivative_at_origin(Side::Plus).unwrap();
        assert_relative_eq!(at0, -1.0, epsilon = 1e-4);
    }

    #[test]
    fn from_parts_validates_shape() {
        let b = BoundaryData::from_real(0.0, 0.0, 0.0, 0.0);
        let r = GridFunction::from_parts(vec![0.5], vec![1.0], vec![0.0], vec![1.0], vec![1.0], vec![0.0], b);
        assert!(r.is_err(), "positive x on the negative side must be rejected");
    }

    #[test]
    fn boundary_norm() {
        let b = BoundaryData::from_real(3.0, 0.0, 4.0, 0.0);
        assert_relative_eq!(b.norm(), 5.0);
    }
}
