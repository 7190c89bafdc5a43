use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("capacity exceeded: {what} is {size}, limit {limit}")]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    Convergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("at s = {s}: {source}")]
    AtPoint { s: f64, source: Box<Error> },

    #[error("at grid point (beta = {beta}, gamma = {gamma}): {source}")]
    AtGridPoint {
        beta: f64,
        gamma: f64,
        source: Box<Error>,
    },

    #[error("threshold {threshold} not reached up to p = {p_max}")]
    NotReached {
        threshold: f64,
        p_max: usize,
        trace: Vec<(usize, f64)>,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in error records and result rows.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Capacity { .. } => "capacity",
            Error::Convergence { .. } => "convergence",
            Error::Unsupported(_) => "unsupported",
            Error::AtPoint { source, .. } | Error::AtGridPoint { source, .. } => source.kind(),
            Error::NotReached { .. } => "not-reached",
            Error::Fit(_) => "fit",
            Error::Undefined(_) => "undefined",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
