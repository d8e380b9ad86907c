use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid povm: {0}")]
    InvalidPovm(String),
    #[error("invalid observables: {0}")]
    InvalidObservables(String),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("cannot align: {0}")]
    CannotAlign(String),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("degenerate fiducial: {0}")]
    DegenerateFiducial(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
}

pub type Result<T> = std::result::Result<T, QcError>;
