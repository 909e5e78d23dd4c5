use thiserror::Error;

/// Errors raised by the geometry, objective, rule and solver layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in vector")]
    NonFinite,

    #[error("invalid constraint set: {}", .0.join("; "))]
    InvalidSet(Vec<String>),

    #[error("invalid objective: {}", .0.join("; "))]
    InvalidObjective(Vec<String>),

    #[error("linear objective is unbounded below over the set")]
    Unbounded,

    #[error("ball center is not feasible (distance to set {distance:e})")]
    InfeasibleCenter { distance: f64 },

    #[error("ball radius must be positive and finite, got {0}")]
    BadRadius(f64),

    #[error("point outside the objective's domain: {0}")]
    Domain(String),

    #[error("objective is not differentiable at {0}")]
    NotDifferentiable(String),

    #[error("missing declared constant or optimum field: {0}")]
    MissingConstant(String),

    #[error("zero gradient at a non-optimal point (Polyak denominator vanishes)")]
    ZeroDenominator,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("unknown or inapplicable claim: {0}")]
    UnknownClaim(String),

    #[error("iteration {k}: {source} (state: {state})")]
    AtIteration {
        k: usize,
        state: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Strips any iteration context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<toml::ser::Error> for Error {
    fn from(e: toml::ser::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
