use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature budget exceeded on [{a}, {b}] after {panels} panels (estimated error {estimate:e})")]
    QuadratureBudget {
        a: f64,
        b: f64,
        panels: usize,
        estimate: f64,
    },

    #[error("radial profile does not decay: tail estimate {tail:e} exceeds tolerance {tol:e}")]
    TailNotDecaying { tail: f64, tol: f64 },

    #[error("no calibration available for dimension n = {0}")]
    Uncalibrated(u32),

    #[error("calibration round-trip residual {residual:e} above tolerance {tol:e} (n = {n})")]
    CalibrationResidual { n: u32, residual: f64, tol: f64 },

    #[error("Gamma function pole at {0}")]
    GammaPole(f64),

    #[error("Gamma function argument {re} + {im}i outside the supported strip")]
    GammaOverflow { re: f64, im: f64 },

    #[error("unsupported Bessel order {0} (must be >= -1/2)")]
    UnsupportedOrder(f64),

    #[error("derivative depth {0} exceeds the supported maximum")]
    DerivativeDepth(u32),

    #[error("grid resolves oscillation frequencies up to {resolved}, requested {requested}")]
    SpectralUnderresolved { resolved: f64, requested: f64 },

    #[error("finite-difference step halving disagrees by {rel:e} (limit {limit:e})")]
    DifferentiationUnderresolved { rel: f64, limit: f64 },

    #[error("M(u)/u unbounded near u = 0 (ratio {0:e})")]
    MellinEndpoint(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
