use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("confusion matrix has a zero total")]
    EmptyMatrix,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("weighted matrix has a zero total")]
    DegenerateWeights,

    #[error("expected agreement equals 1, chance correction is undefined")]
    DegenerateChance,

    #[error("at least three classes are required, got {0}")]
    TooFewClasses(usize),

    #[error("all off-diagonal cells are zero (perfect classification)")]
    PerfectClassification,

    #[error("fit did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("measure is undefined on at least one matrix")]
    NotComparable,

    #[error("no comparable pairs")]
    InsufficientData,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable identifier used in machine-readable error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyMatrix => "empty_matrix",
            Error::InvalidInput(_) => "invalid_input",
            Error::DegenerateWeights => "degenerate_weights",
            Error::DegenerateChance => "degenerate_chance",
            Error::TooFewClasses(_) => "too_few_classes",
            Error::PerfectClassification => "perfect_classification",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NotComparable => "not_comparable",
            Error::InsufficientData => "insufficient_data",
        }
    }
}
