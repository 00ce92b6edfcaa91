use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("jet coordinate {symbol} exceeds truncation level K = {limit}")]
    Truncation { symbol: String, limit: u32 },
    #[error("invalid evolution system: {0}")]
    InvalidSystem(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error("generators are dependent: {0}")]
    DependentGenerators(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("no symbolic antiderivative for {integrand} in {var}")]
    NonIntegrable { integrand: String, var: String },
    #[error("cannot solve level set {equation}: {reason}")]
    LevelSet { equation: String, reason: String },
    #[error("{file}:{line}:{column}: {message}")]
    Input {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// True for errors caused by malformed input rather than a limitation of
    /// the engine.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input { .. }
                | Error::InvalidSystem(_)
                | Error::InvalidConstraint(_)
                | Error::InvalidField(_)
                | Error::Expr(ExprError::Syntax { .. } | ExprError::UnknownIdentifier { .. })
        )
    }

    /// Engine limitations: integrals or level sets out of reach, truncation.
    pub fn is_limitation(&self) -> bool {
        matches!(
            self,
            Error::NonIntegrable { .. } | Error::LevelSet { .. } | Error::Truncation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
