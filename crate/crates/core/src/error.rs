use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: need a < b, got ({a}, {b})")]
    InvalidDomain { a: f64, b: f64 },

    #[error("grid needs at least one cell")]
    EmptyGrid,

    #[error("field has {got} values but the grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at cell {index}")]
    NonFinite { index: usize },

    #[error("time slices must start at 0 and increase strictly")]
    BadTimes,

    #[error("need at least 2 time slices, got {0}")]
    TooFewSlices(usize),

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("mollification width must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("support escapes domain: eps = {eps} but support margin is {margin}")]
    SupportEscapesDomain { eps: f64, margin: f64 },

    #[error("operation requires hypothesis {expected}, data is registered under {found}")]
    WrongHypothesis { expected: &'static str, found: &'static str },

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("solution blew up (NaN or overflow) at step {step}")]
    Blowup { step: usize },

    #[error("CFL-unstable run: max |u| grew from {initial} to {observed}")]
    Unstable { initial: f64, observed: f64 },

    #[error("flux is not convex on [{lo}, {hi}]")]
    NonConvexFlux { lo: f64, hi: f64 },

    #[error("test function support exceeds the space-time domain: {0}")]
    TestFunctionOutside(String),

    #[error("no convergent limit to certify: {0}")]
    NotCauchy(String),

    #[error("sweep failed at eps = {eps}: {source}")]
    Sweep {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
