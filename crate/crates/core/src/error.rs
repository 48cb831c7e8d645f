use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("size cap `{cap}` exceeded: {requested} > {limit}{hint}")]
    SizeCap { cap: &'static str, requested: f64, limit: f64, hint: &'static str },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub fn cap(cap: &'static str, requested: f64, limit: f64) -> Self {
        Error::SizeCap { cap, requested, limit, hint: "" }
    }
}
