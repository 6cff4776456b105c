use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("KL divergence undefined: q[{index}] = 0 while p[{index}] > 0")]
    DivergenceUndefined { index: usize },

    #[error("dataset must contain at least one sample")]
    EmptyDataset,

    #[error("observed pair (input {input}, label {label}) has zero teacher probability")]
    InconsistentDataset { input: usize, label: usize },

    #[error("inconsistent side-information at input {input}: {reason}")]
    InconsistentSideInformation { input: usize, reason: String },

    #[error("estimator {estimator} needs {required} but was given {given}")]
    Protocol {
        estimator: &'static str,
        required: &'static str,
        given: &'static str,
    },

    #[error("invalid instance: {reason}")]
    InvalidInstance { kind: String, reason: String },

    #[error("problem too large for {what}: {detail}")]
    TooLarge { what: &'static str, detail: String },

    #[error("insufficient data: {usable} usable points ({dropped} dropped), need at least 3")]
    InsufficientData { usable: usize, dropped: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
