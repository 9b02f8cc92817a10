use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value violates a type invariant or an operation precondition.
    #[error("invalid `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    /// Malformed text input. `line` is 1-based.
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// A workload cycle did not finish before the next one (or the horizon).
    #[error("cycle {cycle} completes at {completion_s} s, after its deadline of {deadline_s} s")]
    Overlap {
        cycle: usize,
        completion_s: f64,
        deadline_s: f64,
    },

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Prefixes the field path of an [`Error::InvalidInput`], leaving other variants untouched.
    pub fn within(self, parent: &str) -> Self {
        match self {
            Error::InvalidInput { field, reason } => Error::InvalidInput {
                field: format!("{parent}.{field}"),
                reason,
            },
            other => other,
        }
    }
}

pub(crate) fn ensure_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite, got {value}")))
    }
}
