use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrliczError {
    #[error("{what}: argument {value} outside the domain")]
    Domain { what: &'static str, value: f64 },
    #[error("{what}: argument {value} beyond the validated range (max {max})")]
    Range {
        what: &'static str,
        value: f64,
        max: f64,
    },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("not a Δ2 function on the sampled range: {0}")]
    NotDelta2(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, OrliczError>;

impl From<std::io::Error> for OrliczError {
    fn from(e: std::io::Error) -> Self {
        OrliczError::Io(e.to_string())
    }
}

impl From<csv::Error> for OrliczError {
    fn from(e: csv::Error) -> Self {
        OrliczError::Io(e.to_string())
    }
}
