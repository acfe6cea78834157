use thiserror::Error;

/// Failure classes shared by every operation in the crate.
///
/// The three variants map one-to-one onto the CLI exit codes (2, 3, 4).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside an operation's domain (bad sizes, non-physical matrices, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A computation left its valid numerical regime (negative radicands, split spectra).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A configured work budget would be exceeded.
    #[error("resource error: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
