//! Error types shared across the solver.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum WignerError {
    /// An input failed a precondition (bad parameter, malformed config, ...).
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    /// Evaluation requested outside the domain covered by the data.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation is not supported for this input
    /// (e.g. a derivative order beyond the interpolation smoothness).
    #[error("capability error: {0}")]
    Capability(String),

    /// Two objects that must live on the same grids do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A quadrature or iteration did not reach the requested tolerance.
    #[error("numerical error: {message} (error estimate {estimate:.3e})")]
    Numerical { message: String, estimate: f64 },

    /// A linear system is singular or too ill-conditioned to trust.
    #[error("ill-posed linear system: {message} (condition estimate {condition:.3e})")]
    IllPosed { message: String, condition: f64 },

    /// An x-march produced non-finite values.
    #[error("divergence during march at x = {x}")]
    Divergence { x: f64 },

    /// Filesystem or serialization failure while reading/writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl WignerError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        WignerError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code the CLI maps this error to: 2 for validation
    /// problems, 3 for numerical/runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            WignerError::Validation { .. } | WignerError::Domain(_) | WignerError::Capability(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, WignerError>;
