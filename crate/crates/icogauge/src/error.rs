//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A size or resolution guard was exceeded.
    #[error("capacity exceeded for {what}: got {got}, limit {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// An array or argument had the wrong shape or length.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// Atlas or grid construction found an internal inconsistency.
    #[error("construction failed at pixel {pixel}: {detail}")]
    Construction { pixel: u32, detail: String },

    /// Geometric search failed (no matching pixel, group did not close, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// An operation was called outside its documented contract.
    #[error("contract violation: {0}")]
    Contract(&'static str),

    /// A field had an unsupported representation for the operation.
    #[error("field type error: {0}")]
    FieldType(&'static str),

    /// A serialized container (idx, icosig, checkpoint) was malformed.
    #[error("format error at byte {offset}: {detail}")]
    Format { offset: usize, detail: String },

    /// A numeric routine produced or received a non-finite value.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
