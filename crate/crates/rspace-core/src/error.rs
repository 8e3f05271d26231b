use thiserror::Error;

/// Library-wide error type.
///
/// The three variants mirror the three failure classes every operation can
/// report: a `Domain` error means the inputs are outside the operation's
/// domain (wrong field tag, non-nilpotent matrix, bad family), a
/// `Precondition` error means a mathematical hypothesis was violated
/// (points not pairwise opposite, vector not in the required polar), and an
/// `Inconsistency` error means an identity that should hold by theorem
/// failed numerically, which signals corrupted model data or a genuine bug.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }
}
