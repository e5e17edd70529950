use std::path::PathBuf;

/// Errors raised anywhere in the laboratory.
///
/// Every variant has a stable short name (see [`Error::name`]) which the
/// command line front end prints next to the message.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unknown identity family `{0}`")]
    UnknownFamily(String),
    #[error("unknown estimate `{0}`")]
    UnknownEstimate(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("consistency failure: {0}")]
    ConsistencyFailure(String),
    #[error("enclosure radius too large for a fractional part: {0}")]
    RadiusTooLarge(String),
    #[error("derivative vanishes on the candidate interval")]
    DerivativeVanishes,
    #[error("root refinement did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("degree too high: {0}")]
    DegreeTooHigh(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::OracleMismatch(_) => "OracleMismatch",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::UnknownEstimate(_) => "UnknownEstimate",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::ConsistencyFailure(_) => "ConsistencyFailure",
            Error::RadiusTooLarge(_) => "RadiusTooLarge",
            Error::DerivativeVanishes => "DerivativeVanishes",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DegreeTooHigh(_) => "DegreeTooHigh",
            Error::NotFound(_) => "NotFound",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::Format { .. } => "FormatError",
            Error::Io { .. } => "IoError",
            Error::Config(_) => "ConfigError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
