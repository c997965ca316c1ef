use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model (distribution, alternative, kernel) violates its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A function returned a non-finite value where a finite one was required.
    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    /// Degenerate direction or kernel (zero variance, zero norm).
    #[error("ill-posed: {0}")]
    IllPosed(String),

    /// Simulation configuration problem, detected before any work is done.
    #[error("config error: {0}")]
    Config(String),

    /// Rejection sampler envelope does not dominate the target density.
    #[error("rejection envelope violated: ratio {ratio} at ({x}, {y})")]
    Envelope { ratio: f64, x: f64, y: f64 },

    /// Expression or specification parse failure.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
