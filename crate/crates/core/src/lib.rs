//! Implicit finite-difference solver for the generalized time-space
//! fractional diffusion equation with variable coefficients
//!
//! ```text
//! ᶜD_t^{γ,λ} u = ξ(x,t) [p ∂^α_{x+} + (1-p) ∂^α_{x-}] u + f(x,t)
//! ```
//!
//! with a weighted Caputo derivative of order γ ∈ (0,1) in time and
//! two-sided Riemann–Liouville derivatives of order α ∈ (1,2] in space.
//!
//! Time is discretized with the generalized L1 formula and space with
//! weighted shifted Grünwald differences. Each step solves a Toeplitz-like
//! system using FFT products and preconditioned BiCGSTAB, or a
//! Gohberg–Semencul inverse when the diffusion coefficient is constant. For
//! tempered weights `λ(t) = e^{-bt}` a sum-of-exponentials history
//! recurrence replaces the O(M²) memory term.

// Checks written as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix formulas.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod kernels;
pub mod krylov;
pub mod problems;
pub mod solver;
pub mod special;
pub mod toeplitz;

pub use error::{Error, Result};
