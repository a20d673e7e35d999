//! Green's-function evolution of superoscillating and supershift initial
//! data under the one-dimensional time-dependent Schrödinger equation
//! i∂ₜΨ = −∂²ₓΨ + V(t,x)Ψ.
//!
//! Solutions are computed from Ψ(t,x) = ∫ G(t,x,y) F(y) dy with the
//! integral taken along a rotated contour, where it converges absolutely.

// reference constants carry all published digits; `!(a <= b)` is used on
// purpose so that NaN counts as a violation
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod contour_quad;
pub mod error;
pub mod evolve;
pub mod greens;
pub mod initial_data;
pub mod ode_coeff;
pub mod special_fn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
