//! Complex special functions used by the Green's kernels.

mod erf;
mod legendre;
mod r_kernel;

pub use erf::{erf_complex, lambda_fn, lambda_real};
pub use legendre::{legendre_identity_residual, pole_distance, q_lm, LegendreFactor, DEFAULT_POLE_MARGIN};
pub use r_kernel::{r_kernel, r_kernel_derivatives, r_kernel_scaled, sqrt_it};

pub(crate) use legendre::check_pole_margin;
