//! Orbit interpolation for real analytic dynamical systems.
//!
//! The library interpolates discrete orbits `n -> F^n(a)` of contracting
//! product systems by real-variable closed forms (real matrix powers,
//! monomial normal forms, one-dimensional linearizing coordinates), and uses
//! the interpolants to compute and structurally verify return sets
//! `{ n : H(F^n(a)) = 0 }` as finite unions of points and arithmetic
//! progressions.

pub mod exact;
pub mod matrix_power;
pub mod ratpoly;

pub use matrix_power::{
    gen_binomial, is_glnplus, jordan_real, real_power, real_power_with, JordanDecomposition,
    MatrixError, SquareMatrix,
};
