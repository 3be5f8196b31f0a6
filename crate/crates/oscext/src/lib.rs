//! Numerical realizations of the 1D harmonic oscillator restricted at the
//! origin: the half-line boundary-condition families, the one-parameter
//! whole-line family with continuous functions, and the four-parameter
//! family indexed by unitary 2x2 matrices. The crate computes their spectra
//! by secular-equation root finding, resolves the negative-eigenvalue
//! thresholds through the decay integral `G`, and realizes the point
//! functionals (value and slope at the origin) as integrals against
//! explicit kernel functions.

mod error;

pub mod distributions;
pub mod extensions;
pub mod grid;
pub mod hermite;
pub mod ode;
pub mod quad;
pub mod series;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
