use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A quaternion expected to be unit length is off the sphere.
    #[error("quaternion off the unit sphere in {context} (|norm - 1| = {deviation:.3e})")]
    OffSphere { context: &'static str, deviation: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("skeleton schema error at joint `{joint}`: {reason}")]
    SkeletonSchema { joint: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The simulation left the sane numeric range; reported instead of NaNs.
    #[error(
        "numeric divergence at frame {frame}: {quantity} norm {norm:.3e} exceeds limit {limit:.1e} \
         (check gain magnitudes against the step size)"
    )]
    Divergence {
        frame: usize,
        quantity: &'static str,
        norm: f64,
        limit: f64,
    },

    #[error("degenerate geometry in frame {frame}: {reason}")]
    Degenerate { frame: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
