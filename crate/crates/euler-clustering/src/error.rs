//! Error type shared by the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its valid range (bad alpha, k > n, odd n, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violates a precondition (non-finite values, bad labels).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Mismatched dimensions between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An oracle was asked to exceed its configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A cluster lost all members under the `drop-error` policy.
    #[error("empty cluster: {0}")]
    EmptyCluster(String),

    /// A partition handed to an oracle has an empty cluster.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A kernel matrix failed its Hermitian check.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// Two identical centroids admit no separating surface.
    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),

    /// File parsing failed; message carries row/column context.
    #[error("parse error: {0}")]
    Parse(String),

    /// I/O failure with path context.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
