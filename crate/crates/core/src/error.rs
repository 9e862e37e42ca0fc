use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Smoothing parameter violates `mu * rho < 1`; usually a misconfigured `tau`.
    #[error("smoothing parameter mu={mu} with weak-convexity modulus rho={rho} violates mu*rho < 1 (check tau)")]
    Schedule { mu: f64, rho: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("backtracking exceeded {max_shrinks} shrinks at iteration {iteration} (broken gradient or non-smooth objective)")]
    Backtracking { iteration: usize, max_shrinks: usize },

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("trace too short: {0}")]
    TraceTooShort(String),

    #[error("affinity: {0}")]
    Affinity(String),

    #[error("point {index} has zero degree in the affinity graph")]
    IsolatedPoint { index: usize },

    #[error("label vectors differ in length: {0} vs {1}")]
    LabelLength(usize, usize),

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// Wraps an error with the pipeline stage in which it occurred.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
