use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("unknown transition {0}")]
    UnknownTransition(usize),
    #[error("transition {transition} does not start in the current control state")]
    WrongSource { transition: usize },
    #[error("run is not executable: stuck at index {index}")]
    RunStuck { index: usize },
    #[error("machine has a zero test on transition {transition}; the monotone fragment forbids zero tests")]
    ZeroTestInMonotone { transition: usize },
    #[error("invalid bounded language: {0}")]
    InvalidBoundedLang(String),
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("order is not antisymmetric on {0}")]
    NotAntisymmetric(String),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
