use alloc::string::String;

/// Errors raised by the fusion pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("total conflict between mass functions (K = {0})")]
    TotalConflict(f64),
    #[error("degenerate evidence: {0}")]
    DegenerateEvidence(String),
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),
    #[error("missing likelihood: {0}")]
    MissingLikelihood(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
