use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto the CLI exit-code taxonomy: `Usage` and `Format` are
/// caller/input problems (exit 2), `Numeric` covers non-finite arithmetic
/// (exit 3), everything else is internal (exit 1).
#[derive(Error, Debug)]
pub enum Error {
    /// Bad arguments: dimension mismatches, invalid configs, missing inputs.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed input file (bad magic, truncated values, unparseable JSON).
    #[error("format error: {0}")]
    Format(String),

    /// A computation produced NaN or infinity.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// Derived artifacts (barcode, manifolds) do not come from the given grid.
    #[error("provenance mismatch: {0}")]
    Provenance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Exit code for the CLI: 0 is success, 1 internal, 2 input/usage, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Format(_) | Error::Provenance(_) => 2,
            Error::Numeric(_) | Error::Diverged { .. } => 3,
            Error::Io(e) if e.kind() == std::io::ErrorKind::NotFound => 2,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
