//! Numerical construction and verification of mild solutions for nonlinear
//! fractional evolution systems
//!
//! ```text
//! ₀D^β z(t) = A z(t) + h(t, z(t)),   t ∈ ∪ (u_j, t_{j+1}],   1 < β < 2,
//! z(t) = φ_j(t, z(t_j⁻)),            t ∈ (t_j, u_j],
//! ```
//!
//! with Riemann-Liouville derivatives, non-instantaneous impulses and the
//! Dirichlet Laplacian on [0, π] realised through its sine eigenbasis.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fraccalc;
pub mod io;
pub mod mild;
pub mod problem;
pub mod quadrature;
pub mod resolvent;
pub mod special;
pub mod state;

pub use error::{Error, Result};
