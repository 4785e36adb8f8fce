//! Error type shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// The variants map onto process exit codes in the CLI: configuration and
/// I/O problems are user-facing (`3`), numeric failures indicate a violated
/// internal invariant (`4`).
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration input (bad key, malformed value, inconsistent
    /// geometry parameters).
    #[error("config error: {0}")]
    Config(String),

    /// Geometric precondition violated (circle not orthogonal to the unit
    /// circle, regions overlap, point outside the domain of an operation).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numeric procedure failed to converge or an internal consistency
    /// check tripped.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Underlying file-system failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
