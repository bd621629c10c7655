//! Numerical laboratory for L_p quasi-norms with 0 < p < 1, moduli of
//! smoothness, and best approximation by trigonometric polynomials, splines,
//! and algebraic polynomials.
//!
//! The crate is organized bottom-up:
//!
//! * [`piecewise`] — exact piecewise-polynomial algebra on the circle and on
//!   finite intervals; every closed-form test family lives here.
//! * [`families`] — the ramp/plateau test functions and their repeated
//!   periodic integrals.
//! * [`evaluable`] — the common function abstraction consumed by norms and
//!   moduli (piecewise polynomial, basis expansion, or black-box evaluator).
//! * [`quasinorm`] — composite Gauss–Legendre quadrature for `|f|^p` with
//!   root splitting and graded panels, plus the `phi^sigma` weighted variant.
//! * [`moduli`] — finite differences, the classical and Ditzian–Totik moduli
//!   of smoothness, the weighted main-part modulus, and dyadic modulus
//!   integrals with bracketing.
//! * [`approx`] — the three approximation families and the multistart
//!   IRLS/continuation solver for non-convex best approximation, with an
//!   exhaustive lattice oracle at tiny dimension.
//! * [`catalog`] — the runnable inequality/experiment registry: exact
//!   combinatorial coefficients, exponent fits, tail sums, and one check per
//!   named inequality.

pub mod approx;
pub mod catalog;
pub mod domain;
pub mod evaluable;
pub mod families;
pub mod moduli;
pub mod piecewise;
pub mod quasinorm;

pub use domain::Domain;
pub use evaluable::{Evaluable, PointFunction};
pub use piecewise::PiecewisePoly;
pub use quasinorm::{PNorm, QuadratureSpec};
