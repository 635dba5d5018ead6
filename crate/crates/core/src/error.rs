use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Argument sits on a pole of Γ (or of ζ_D); carries the offending location.
    #[error("pole at {location}: {detail}")]
    Pole { location: f64, detail: String },

    #[error("range error: coefficient overflow at power {power}")]
    Range { power: usize },

    #[error("series window exceeded: |z| = {z} > {limit}")]
    Window { z: f64, limit: f64 },

    #[error("invalid hypergeometric parameters: {0}")]
    Parameter(String),

    #[error("invalid model: {0}")]
    ModelInvalid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Evaluation or mode budget exhausted. `value`/`estimate` hold the best result so far.
    #[error("budget exceeded: {detail} (best value {value:e}, error estimate {estimate:e})")]
    Budget {
        detail: String,
        value: f64,
        estimate: f64,
    },

    #[error("precision error: {0}")]
    Precision(String),

    #[error("inconsistent routes: {0}")]
    Inconsistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 1,
            Error::Budget { .. } | Error::Precision(_) | Error::Inconsistency(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
