//! Numerical laboratory for blow-up versus global existence of
//!
//! ```text
//! u_t = u_xx + α(t) f(u)      in (0, L)
//! ∂u/∂ν = β(t) g(u)            at x = 0 and x = L
//! u(x, 0) = u0(x)
//! ```
//!
//! The crate decides the integral hypotheses that separate the two regimes,
//! computes blow-up time bounds, integrates the problem by the method of
//! lines, and reproduces the comparison/functional arguments numerically.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod criteria;
pub mod expr;
pub mod kernel;
pub mod par;
pub mod quad;
pub mod report;
pub mod scenario;
pub mod solver;
pub mod sweep;
