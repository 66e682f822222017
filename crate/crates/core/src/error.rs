use thiserror::Error;

use crate::world::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The configuration is internally inconsistent (e.g. price below variable cost).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),

    /// No facility set satisfies the constraints; the message names the binding one.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("instance too large: {0}")]
    Size(String),

    #[error("at t = {t}: {source}")]
    AtParameter { t: f64, source: Box<Error> },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn at(t: f64, source: Error) -> Self {
        Error::AtParameter {
            t,
            source: Box::new(source),
        }
    }

    /// Innermost error, looking through parameter annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtParameter { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self.root(), Error::Infeasible(_))
    }
}
