use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Invalid argument supplied by the caller.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A configured effort budget (factorization, enumeration, precision) was exhausted.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// The input lies above a configured size cap.
    #[error("cap exceeded: {what} = {value} > {cap}")]
    CapExceeded { what: &'static str, value: String, cap: String },
    /// A computed object violates an identity that must hold by theory.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    /// A fixture or table line failed to parse.
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    /// The presented group is not finite.
    #[error("infinite group: {0}")]
    Infinite(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_) | Error::CapExceeded { .. })
    }

    /// Whether a rendered error message (as stored in a scan row's error
    /// column) came from a budget or cap error.
    pub fn is_budget_message(msg: &str) -> bool {
        msg.starts_with("budget exceeded: ") || msg.starts_with("cap exceeded: ")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
