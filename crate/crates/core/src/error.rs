use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shape, arity or parameter misuse detected before any computation.
    #[error("usage error: {0}")]
    Usage(String),

    /// A composition was asked to evaluate `F(1 + u)` where `1 + u` is at or
    /// below the vacuum floor.
    #[error("vacuum: min(1 + q) = {min_density:e} is at or below the floor {floor:e}")]
    Vacuum { min_density: f64, floor: f64 },

    /// The solver detected a blow-up criterion during a run.
    #[error("blow-up at t = {time}: {reason} (min density {min_density:e})")]
    BlowUp {
        time: f64,
        min_density: f64,
        reason: String,
    },

    #[error("step size {dt:e} exceeds the advective limit {dt_max:e}")]
    StepSize { dt: f64, dt_max: f64 },

    /// A requested tolerance cannot be met with the blocks resolvable on this grid.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
