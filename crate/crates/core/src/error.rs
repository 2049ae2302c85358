use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude {0} is negative")]
    NegativeAmplitude(f64),

    #[error("probabilities sum to {sum}, expected 1 within 1e-12")]
    ProbabilitySumMismatch { sum: f64 },

    #[error("probability {0} is negative or not finite")]
    InvalidProbability(f64),

    #[error("amplitude {0} is not finite")]
    NonFiniteAmplitude(f64),

    #[error("constellation has no points with positive probability")]
    EmptyConstellation,

    #[error("constellation has zero mean energy (all mass at x = 0)")]
    DegenerateConstellation,

    #[error(
        "noise mean must be positive and finite, got {0}; use the noiseless model for zero noise"
    )]
    InvalidNoiseMean(f64),

    #[error("signal energy must be nonnegative and finite, got {0}")]
    InvalidEnergy(f64),

    #[error("tolerance {0} is outside (0, 1)")]
    ToleranceOutOfRange(f64),

    #[error("argument out of domain: {0}")]
    DomainError(String),

    #[error("truncation remainder bound {bound:e} exceeds the allowed {limit:e}")]
    RemainderTooLarge { bound: f64, limit: f64 },

    #[error("extrapolation grid rejected: {0}")]
    GridTooCoarse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::ToleranceOutOfRange(tol))
    }
}
