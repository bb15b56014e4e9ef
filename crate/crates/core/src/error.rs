use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode index {index} out of range for a {modes}-mode state")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("mode count mismatch: {left} vs {right}")]
    ModeCountMismatch { left: usize, right: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    /// The in-situ local-oscillator population that scales the measured
    /// quadrature `(a b^dag + a^dag b) / <b^dag b>^(1/2)` is too small.
    #[error(
        "degenerate quadrature normalization: local oscillator of system {system} has \
         population {population:e} below floor {floor:e} (denominator <b^dag b>^(1/2))"
    )]
    DegenerateNormalization {
        system: usize,
        population: f64,
        floor: f64,
    },

    #[error(
        "block of dimension {dimension} needs {required_bytes} bytes of eigendecomposition \
         workspace, budget is {budget_bytes} bytes"
    )]
    ResourceLimit {
        dimension: usize,
        required_bytes: usize,
        budget_bytes: usize,
    },

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("table format error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
