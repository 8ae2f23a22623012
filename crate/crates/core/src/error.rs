use thiserror::Error;

/// Failure categories shared by every module of the crate.
///
/// The categories map one-to-one onto the process exit codes of the command
/// line front end (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: dimension mismatch, non-unit directions, bad grids.
    #[error("usage error: {0}")]
    Usage(String),
    /// The plane set does not define a regular domain.
    #[error("not regular: {0}")]
    NotRegular(String),
    /// A query point lies outside the domain it was evaluated against.
    #[error("domain error: {0}")]
    OutsideDomain(String),
    /// The requested operation is not available for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A graph surface lost the spacelike property.
    #[error("not spacelike: {0}")]
    NotSpacelike(String),
    /// The Gauss flow or the Riccati evolution reached a focal point.
    #[error("flow not graphical at t = {t}: {detail}")]
    Focal { t: f64, detail: String },
    /// An iterative method failed; `diagnostics` carries its history.
    #[error("numeric failure: {message}")]
    Numeric { message: String, diagnostics: Vec<String> },
    /// A verified property did not hold.
    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl Error {
    pub fn numeric(message: impl Into<String>) -> Self {
        Error::Numeric {
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn numeric_with(message: impl Into<String>, diagnostics: Vec<String>) -> Self {
        Error::Numeric {
            message: message.into(),
            diagnostics,
        }
    }

    /// Exit code: 2 validation, 3 numeric, 4 assertion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::NotRegular(_) | Error::OutsideDomain(_) | Error::Unsupported(_) => 2,
            Error::NotSpacelike(_) | Error::Focal { .. } | Error::Numeric { .. } => 3,
            Error::Assertion(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
