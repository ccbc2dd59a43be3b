//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates one of its documented constraints.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument to an operation is out of range or inconsistent.
    #[error("argument error: {0}")]
    Argument(String),

    /// A graph or tensor does not have the expected structure.
    #[error("structural error: {0}")]
    Structural(String),

    /// A dataset record could not be ingested.
    #[error("ingestion error for record '{record}': {reason}")]
    Ingestion { record: String, reason: String },

    /// An image could not be decoded or has an unsupported layout.
    #[error("format error: {0}")]
    Format(String),

    /// A checkpoint does not match the architecture it is applied to.
    #[error("checkpoint incompatibility: {0}")]
    Incompatible(String),

    /// A checkpoint file failed its integrity checks.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
