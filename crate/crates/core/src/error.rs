use thiserror::Error;

use crate::market::PricePath;

/// Errors raised by the numerical and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("impossible outcome: branch probability {probability:e} is below the collapse threshold")]
    ImpossibleOutcome { probability: f64 },

    #[error("impossible evidence: the signal has zero probability under every state")]
    ImpossibleEvidence,

    /// The price left the positive finite range. `partial` holds every period
    /// completed before the halt.
    #[error("simulation halted in period {period}: {reason}")]
    SimulationHalt {
        period: usize,
        reason: String,
        partial: Box<PricePath>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
