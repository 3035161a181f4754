use std::path::PathBuf;

/// Errors raised by the kinetic and fluid toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("time step {dt} violates the transport CFL limit; use dt <= {max}")]
    Cfl { dt: f64, max: f64 },
    #[error("picard iteration did not converge after {} iterations; increments {history:?}", history.len())]
    Picard { history: Vec<f64> },
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("linear algebra: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
