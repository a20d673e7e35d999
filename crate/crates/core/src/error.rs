use thiserror::Error;

/// Errors raised by kernel construction, quadrature and special-function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("overflow: {0}")]
    Overflow(String),

    #[error("point {re}{im:+}i lies within {margin} of a pole of sech (distance {distance:.3e})")]
    PoleMargin {
        re: f64,
        im: f64,
        margin: f64,
        distance: f64,
    },

    #[error("time {t} is outside the kernel horizon (0, {horizon})")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("quadrature did not converge: {panels} panels used, error estimate {err_estimate:.3e} > tol {tol:.3e}")]
    NonConvergence {
        panels: usize,
        err_estimate: f64,
        tol: f64,
    },

    #[error("extended-precision budget exhausted: condition number {condition:.3e} at {bits} bits")]
    PrecisionExhausted { condition: f64, bits: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
