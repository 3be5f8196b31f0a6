//! Boundary-condition descriptors for every selfadjoint realization of the
//! restricted oscillator, their residuals on trace data, and the
//! indefinite-inner-product classification that certifies each family.
//!
//! Families:
//! - `HalfLinePlus{θ}` / `HalfLineMinus{θ}`: `cos θ f(±0) = sin θ f'(±0)`.
//! - `BTheta{θ}`: `f` continuous at 0 and
//!   `√2 cos θ f(0) + sin θ [f'(-0) - f'(+0)] = 0`.
//! - `CK{φ, α, β₁, β₂}`: the two-condition family indexed by a unitary
//!   2x2 matrix `K`, assembled as
//!   `K = e^{iφ} [[e^{iβ₁} sin α, e^{-iβ₂} cos α], [e^{iβ₂} cos α, -e^{-iβ₁} sin α]]`.
//!
//! Each family corresponds to a maximal neutral subspace of C², C³ or C⁴
//! under the Hermitian form induced by integration by parts;
//! [`neutral_subspace_check`] re-derives the solution space of the boundary
//! conditions numerically and verifies neutrality and maximal dimension.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::BoundaryData;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Tagged descriptor of one selfadjoint realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extension {
    HalfLinePlus { theta: f64 },
    HalfLineMinus { theta: f64 },
    BTheta { theta: f64 },
    CK { phi: f64, alpha: f64, beta1: f64, beta2: f64 },
}

impl Extension {
    pub fn half_line_plus(theta: f64) -> Result<Extension> {
        check_theta(theta)?;
        Ok(Extension::HalfLinePlus { theta })
    }

    pub fn half_line_minus(theta: f64) -> Result<Extension> {
        check_theta(theta)?;
        Ok(Extension::HalfLineMinus { theta })
    }

    pub fn b_theta(theta: f64) -> Result<Extension> {
        check_theta(theta)?;
        Ok(Extension::BTheta { theta })
    }

    pub fn ck(phi: f64, alpha: f64, beta1: f64, beta2: f64) -> Result<Extension> {
        for (name, v) in [("phi", phi), ("alpha", alpha), ("beta1", beta1), ("beta2", beta2)] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(Extension::CK { phi, alpha, beta1, beta2 })
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta >= 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside the parameter range [0, \u{03c0})"
        )));
    }
    Ok(())
}

/// Unitary 2x2 matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMatrix(pub [[Complex64; 2]; 2]);

impl KMatrix {
    /// Assemble from the four real parameters.
    pub fn from_params(phi: f64, alpha: f64, beta1: f64, beta2: f64) -> KMatrix {
        let e = |x: f64| Complex64::new(x.cos(), x.sin());
        let (s, co) = (alpha.sin(), alpha.cos());
        let p = e(phi);
        KMatrix([
            [p * e(beta1) * s, p * e(-beta2) * co],
            [p * e(beta2) * co, -p * e(-beta1) * s],
        ])
    }

    /// Frobenius norm of `K*K - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let k = &self.0;
        let mut defect = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut entry = Complex64::new(0.0, 0.0);
                for (l, row) in k.iter().enumerate() {
                    entry += row[i].conj() * k[l][j];
                }
                if i == j {
                    entry -= c(1.0);
                }
                defect += entry.norm_sqr();
            }
        }
        defect.sqrt()
    }

    /// The two linear conditions on `(f(-0), f'(-0), f(+0), f'(+0))` whose
    /// joint kernel is the domain of the corresponding realization. Row
    /// entries are the coefficients multiplying the trace vector.
    pub fn condition_rows(&self) -> [[Complex64; 4]; 2] {
        let k = &self.0;
        [
            [
                c(1.0) - k[0][0],
                I * (c(1.0) + k[0][0]),
                I * k[0][1],
                -k[0][1],
            ],
            [
                -k[1][0],
                I * k[1][0],
                I * (c(1.0) + k[1][1]),
                c(1.0) - k[1][1],
            ],
        ]
    }
}

impl Extension {
    /// The assembled unitary matrix for the four-parameter family.
    pub fn k_matrix(&self) -> Option<KMatrix> {
        match *self {
            Extension::CK { phi, alpha, beta1, beta2 } => {
                Some(KMatrix::from_params(phi, alpha, beta1, beta2))
            }
            _ => None,
        }
    }
}

/// Norm of the boundary-condition defect of `b`, scaled by `max(1, ‖b‖)`.
/// Zero exactly when the trace data satisfies the extension's conditions.
/// For the half-line families only the matching side enters; for the
/// one-parameter family the continuity defect is part of the residual.
pub fn boundary_residual(ext: &Extension, b: &BoundaryData) -> f64 {
    let scale = b.norm().max(1.0);
    match *ext {
        Extension::HalfLinePlus { theta } => {
            (c(theta.cos()) * b.f_plus - c(theta.sin()) * b.df_plus).norm() / scale
        }
        Extension::HalfLineMinus { theta } => {
            (c(theta.cos()) * b.f_minus - c(theta.sin()) * b.df_minus).norm() / scale
        }
        Extension::BTheta { theta } => {
            let continuity = (b.f_plus - b.f_minus).norm_sqr();
            let f0 = 0.5 * (b.f_plus + b.f_minus);
            let jump = c(std::f64::consts::SQRT_2 * theta.cos()) * f0
                + c(theta.sin()) * (b.df_minus - b.df_plus);
            (continuity + jump.norm_sqr()).sqrt() / scale
        }
        Extension::CK { phi, alpha, beta1, beta2 } => {
            let rows = KMatrix::from_params(phi, alpha, beta1, beta2).condition_rows();
            let x = b.as_vector();
            let mut acc = 0.0;
            for row in &rows {
                let mut s = Complex64::new(0.0, 0.0);
                for (coef, val) in row.iter().zip(x.iter()) {
                    s += coef * val;
                }
                acc += s.norm_sqr();
            }
            acc.sqrt() / scale
        }
    }
}

/// Named distinguished members of the four-parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialCase {
    /// Continuous value and slope: the unrestricted oscillator.
    Classical,
    /// Slope jump proportional to the value: `f'(-0) - f'(+0) = 2 tan α f(0)`.
    Delta { alpha: f64 },
    /// Value jump proportional to the slope: `f(+0) - f(-0) = -2 tan α f'(0)`.
    DeltaPrime { alpha: f64 },
}

/// Parameter quadruples for the named cases.
///
/// The classical case is `K = [[0, i], [i, 0]]`, reached at
/// `(φ, α, β₁, β₂) = (π/2, 0, 0, 0)`; it is also the `α → 0` limit of the
/// value-coupling family `K = i e^{iα} [[sin α, cos α], [cos α, -sin α]]`.
pub fn ck_from_special(case: SpecialCase) -> Result<Extension> {
    let pi = std::f64::consts::PI;
    match case {
        SpecialCase::Classical => Extension::ck(pi / 2.0, 0.0, 0.0, 0.0),
        SpecialCase::Delta { alpha } => {
            check_special_alpha(alpha)?;
            Extension::ck(alpha + pi / 2.0, alpha, 0.0, 0.0)
        }
        SpecialCase::DeltaPrime { alpha } => {
            check_special_alpha(alpha)?;
            Extension::ck(pi / 2.0 - alpha, alpha, 0.0, 0.0)
        }
    }
}

fn check_special_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside (0, \u{03c0})"
        )));
    }
    Ok(())
}

/// Coupling constant of the one-parameter family, or the Dirichlet endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Finite(f64),
    /// `θ = 0`, where the coupling diverges and the condition degenerates
    /// to `f(0) = 0`.
    Dirichlet,
}

/// `θ ↦ c = cot θ / √2`; the endpoint `θ = 0` maps to [`Coupling::Dirichlet`].
pub fn coupling_from_btheta(theta: f64) -> Result<Coupling> {
    check_theta(theta)?;
    if theta == 0.0 {
        return Ok(Coupling::Dirichlet);
    }
    Ok(Coupling::Finite(
        theta.cos() / theta.sin() / std::f64::consts::SQRT_2,
    ))
}

/// Inverse map: `c = cot θ / √2` with `θ ∈ (0, π)`.
pub fn btheta_from_coupling(c: Coupling) -> Extension {
    match c {
        Coupling::Dirichlet => Extension::BTheta { theta: 0.0 },
        Coupling::Finite(v) => {
            let cot = v * std::f64::consts::SQRT_2;
            // atan2 puts the angle into (0, π) for positive sine
            let theta = (1.0f64).atan2(cot);
            Extension::BTheta { theta }
        }
    }
}

/// Reflection symmetry of the half-line families: composing with `t ↦ -t`
/// maps parameter `θ` on one side to `π - θ` on the other, with the
/// Dirichlet condition `θ = 0` fixed.
pub fn symmetry_map(theta: f64, side: crate::grid::Side) -> Result<(f64, crate::grid::Side)> {
    check_theta(theta)?;
    let mapped = if theta == 0.0 { 0.0 } else { std::f64::consts::PI - theta };
    Ok((mapped, side.opposite()))
}

/// Hermitian form of the trace-space classification in dimension 2, 3 or 4.
#[derive(Debug, Clone)]
pub struct IndefiniteForm {
    pub dimension: usize,
    /// Hermitian Gram matrix, row-major.
    pub gram: Vec<Vec<Complex64>>,
}

impl IndefiniteForm {
    /// On C²: `[x, y] = ⟨Jx, y⟩` with `J = [[0, -i], [i, 0]]`.
    pub fn half_line() -> IndefiniteForm {
        IndefiniteForm {
            dimension: 2,
            gram: vec![vec![c(0.0), -I], vec![I, c(0.0)]],
        }
    }

    /// On C³ in coordinates `(f(0), f'(-0), f'(+0))`.
    pub fn b_family() -> IndefiniteForm {
        IndefiniteForm {
            dimension: 3,
            gram: vec![
                vec![c(0.0), -I, I],
                vec![I, c(0.0), c(0.0)],
                vec![-I, c(0.0), c(0.0)],
            ],
        }
    }

    /// On C⁴ in coordinates `(f(-0), f'(-0), f(+0), f'(+0))`.
    pub fn ck_family() -> IndefiniteForm {
        IndefiniteForm {
            dimension: 4,
            gram: vec![
                vec![c(0.0), -I, c(0.0), c(0.0)],
                vec![I, c(0.0), c(0.0), c(0.0)],
                vec![c(0.0), c(0.0), c(0.0), I],
                vec![c(0.0), c(0.0), -I, c(0.0)],
            ],
        }
    }

    /// `[x, y] = ⟨G x, y⟩ = Σ (Gx)_j conj(y_j)`.
    pub fn apply(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (row, &yj) in self.gram.iter().zip(y.iter()) {
            let mut gx = Complex64::new(0.0, 0.0);
            for (g, &xk) in row.iter().zip(x.iter()) {
                gx += g * xk;
            }
            acc += gx * yj.conj();
        }
        acc
    }
}

/// Nullspace basis of a small complex matrix by Gauss elimination with
/// partial pivoting. Rows are linear functionals; the kernel is returned as
/// an orthogonal-ish (not normalized) spanning set.
fn nullspace(rows: &[Vec<Complex64>], dim: usize) -> Vec<Vec<Complex64>> {
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    let tol = 1e-10
        * m.iter()
            .flat_map(|r| r.iter().map(|z| z.norm()))
            .fold(1.0f64, f64::max);
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..dim {
        // find the largest entry in this column at or below `row`
        let mut best = row;
        let mut best_val = 0.0;
        for r in row..m.len() {
            let v = m[r][col].norm();
            if v > best_val {
                best_val = v;
                best = r;
            }
        }
        if best_val <= tol {
            continue;
        }
        m.swap(row, best);
        let p = m[row][col];
        for e in m[row].iter_mut() {
            *e /= p;
        }
        for r in 0..m.len() {
            if r != row {
                let f = m[r][col];
                if f.norm() > 0.0 {
                    for j in 0..dim {
                        let sub = f * m[row][j];
                        m[r][j] -= sub;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..dim).filter(|j| !pivots.contains(j)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[f] = c(1.0);
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -m[r][f];
        }
        basis.push(v);
    }
    basis
}

/// Outcome of the neutrality verification.
#[derive(Debug, Clone)]
pub struct NeutralityReport {
    pub neutral: bool,
    pub solution_dim: usize,
    pub expected_dim: usize,
    /// Largest `|[u, v]|` over the basis pairs of the solution space.
    pub worst_form_value: f64,
    /// Basis pair realizing the worst value, if the check failed.
    pub offending_pair: Option<(usize, usize)>,
}

impl NeutralityReport {
    pub fn passed(&self) -> bool {
        self.neutral && self.solution_dim == self.expected_dim
    }
}

/// Build the solution space of the extension's boundary conditions inside
/// the appropriate trace space and verify it is a maximal neutral subspace
/// of the classification form.
pub fn neutral_subspace_check(ext: &Extension) -> NeutralityReport {
    match *ext {
        Extension::HalfLinePlus { theta } | Extension::HalfLineMinus { theta } => {
            let rows = vec![vec![c(theta.cos()), c(-theta.sin())]];
            run_neutrality(&rows, &IndefiniteForm::half_line(), 1)
        }
        Extension::BTheta { theta } => {
            // coordinates (f(0), f'(-0), f'(+0))
            let rows = vec![vec![
                c(std::f64::consts::SQRT_2 * theta.cos()),
                c(theta.sin()),
                c(-theta.sin()),
            ]];
            run_neutrality(&rows, &IndefiniteForm::b_family(), 2)
        }
        Extension::CK { phi, alpha, beta1, beta2 } => {
            neutral_subspace_check_k(&KMatrix::from_params(phi, alpha, beta1, beta2))
        }
    }
}

/// Neutrality check for an explicit (not necessarily unitary) matrix; a
/// perturbed non-unitary input must fail.
pub fn neutral_subspace_check_k(k: &KMatrix) -> NeutralityReport {
    let rows: Vec<Vec<Complex64>> = k.condition_rows().iter().map(|r| r.to_vec()).collect();
    run_neutrality(&rows, &IndefiniteForm::ck_family(), 2)
}

fn run_neutrality(rows: &[Vec<Complex64>], form: &IndefiniteForm, expected_dim: usize) -> NeutralityReport {
    let basis = nullspace(rows, form.dimension);
    let mut worst = 0.0f64;
    let mut pair = None;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let scale = norm(&basis[i]) * norm(&basis[j]);
            let v = form.apply(&basis[i], &basis[j]).norm() / scale.max(1e-300);
            if v > worst {
                worst = v;
                pair = Some((i, j));
            }
        }
    }
    let neutral = worst < 1e-9;
    NeutralityReport {
        neutral,
        solution_dim: basis.len(),
        expected_dim,
        worst_form_value: worst,
        offending_pair: if neutral { None } else { pair },
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Extension::HalfLinePlus { theta } => write!(f, "family=halfline-plus theta={theta}"),
            Extension::HalfLineMinus { theta } => write!(f, "family=halfline-minus theta={theta}"),
            Extension::BTheta { theta } => write!(f, "family=btheta theta={theta}"),
            Extension::CK { phi, alpha, beta1, beta2 } => {
                write!(f, "family=ck phi={phi} alpha={alpha} beta1={beta1} beta2={beta2}")
            }
        }
    }
}

impl FromStr for Extension {
    type Err = Error;

    /// Parse the plain key-value form, e.g. `family=btheta theta=1.23` or
    /// `family=ck phi=0.5 alpha=0.1 beta1=0 beta2=0`.
    fn from_str(s: &str) -> Result<Extension> {
        let mut family = None;
        let mut kv = std::collections::BTreeMap::new();
        for token in s.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{token}`")))?;
            if key == "family" {
                family = Some(value.to_string());
            } else {
                let parsed: f64 = value
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad numeric value for `{key}`: `{value}`")))?;
                kv.insert(key.to_string(), parsed);
            }
        }
        let family = family.ok_or_else(|| Error::Parse("missing `family=` token".into()))?;
        let get = |key: &str| -> Result<f64> {
            kv.get(key)
                .copied()
                .ok_or_else(|| Error::Parse(format!("missing `{key}=` for family {family}")))
        };
        match family.as_str() {
            "halfline-plus" => Extension::half_line_plus(get("theta")?),
            "halfline-minus" => Extension::half_line_minus(get("theta")?),
            "btheta" => Extension::b_theta(get("theta")?),
            "ck" => Extension::ck(get("phi")?, get("alpha")?, get("beta1")?, get("beta2")?),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}
