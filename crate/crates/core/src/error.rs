use thiserror::Error;

use crate::fock::BasisLabel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label {label} exceeds photon cap {cap}")]
    Truncation { label: BasisLabel, cap: u8 },

    #[error("state has no amplitudes")]
    EmptyState,

    #[error("states use different photon caps ({0} vs {1})")]
    CapMismatch(u8, u8),

    #[error("states are expressed in different Bob mode frames")]
    FrameMismatch,

    #[error("hadamard-basis measurement is only defined for Bob's channel")]
    InvalidBasis,

    #[error("operation {0} is not admissible in the simplified protocol")]
    InadmissibleOp(&'static str),

    #[error("stage-2 input has weight {weight:.3e} outside the specified domain of V")]
    OutsideSpecifiedSpan { weight: f64 },

    #[error("stage-1 input must leave Alice's ancilla in vacuum")]
    AncillaNotVacuum,

    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("undefined population: {0}")]
    DegeneratePopulation(&'static str),

    #[error("config line {line}: {key}: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    /// Errors caused by bad user input, as opposed to a violated internal
    /// contract. The CLI maps these to exit status 1 and the rest to 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EpsilonOutOfRange(_)
                | Error::InvalidProbabilities(_)
                | Error::Config { .. }
                | Error::Usage(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
