use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample rate {sample_rate} Hz does not exceed the Nyquist rate {required} Hz")]
    NyquistViolation { sample_rate: f64, required: f64 },

    #[error("|f| is constant; it has no isolated global maxima")]
    ConstantModulus,

    #[error("degenerate global maximum at t = {location}: g'' = {second_derivative:e}")]
    DegenerateMaximum {
        location: f64,
        second_derivative: f64,
    },

    #[error("no frequency bin exceeds the support threshold")]
    EmptySupport,

    #[error("argument {0} lies outside [-1, 1]")]
    DomainError(f64),

    #[error("signal is identically zero")]
    ZeroSignal,

    #[error("energy-ratio denominator vanishes")]
    ZeroDenominator,

    #[error("signal has {len} samples, shorter than the window length {window}")]
    SignalTooShort { len: usize, window: usize },

    #[error("frame {frame}: band around {center} Hz contains no frequency bin")]
    EmptyBand { frame: usize, center: f64 },

    #[error("quadrature did not converge: error estimate {error_estimate:e} > tolerance {tolerance:e}")]
    QuadratureNonConvergence {
        error_estimate: f64,
        tolerance: f64,
    },

    #[error("gcd-1 frequency set not found after {0} resamples")]
    RejectionOverflow(usize),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
