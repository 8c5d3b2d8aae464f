use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("custom recurrence has {available} coefficient pairs, {needed} required")]
    InsufficientRecurrence { needed: usize, available: usize },

    #[error("measure is empty (no samples or all weights zero)")]
    EmptyMeasure,

    #[error("degenerate measure: leading minor {minor} of the Gram matrix is not positive")]
    DegenerateMeasure { minor: usize },

    #[error("Gram matrix is not positive definite (pivot {pivot})")]
    GramNotPositiveDefinite { pivot: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("polynomial degree {degree} exceeds the maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("non-integer power requires a positive spectrum (eigenvalue {eigenvalue})")]
    PositiveSpectrumRequired { eigenvalue: f64 },

    #[error("state has zero projection on every eigenvector")]
    DegenerateState,

    #[error("density matrix construction is singular: {0}")]
    DegenerateConstruction(String),

    #[error("requested {requested} clusters but the measure has only {support} support points")]
    RankDeficientMeasure { requested: usize, support: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("all cluster weight functions vanish at x = {x}")]
    DegeneratePoint { x: f64 },

    #[error("numerical self-check failed: {0}")]
    SelfCheck(String),

    #[error("{}line {line}: {message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("column spec: {0}")]
    ColumnSpec(String),

    #[error("empty input")]
    EmptyInput,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the numerical state of the problem rather
    /// than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateMeasure { .. }
                | Error::GramNotPositiveDefinite { .. }
                | Error::InvalidMatrix(_)
                | Error::PositiveSpectrumRequired { .. }
                | Error::DegenerateState
                | Error::DegenerateConstruction(_)
                | Error::RankDeficientMeasure { .. }
                | Error::DegeneratePoint { .. }
                | Error::SelfCheck(_)
        )
    }
}
