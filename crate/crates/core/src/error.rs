use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("homogeneous coordinates (0, 0) do not name a point")]
    ZeroPoint,

    #[error("non-finite homogeneous coordinates")]
    NonFinite,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("preparation inverse missed target by {residual:e}")]
    PreparationInverse { residual: f64 },

    #[error("count record has no positive counts")]
    EmptyCounts,

    #[error("maximum-likelihood reconstruction did not converge after {iterations} iterations")]
    MleNonConvergence { iterations: usize },

    #[error("density matrix spectrum is degenerate (eigenvalue gap {gap:e}); no unique nearest pure state")]
    DegenerateSpectrum { gap: f64 },

    #[error("tomography failed at iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("all {trials} Monte-Carlo trials failed")]
    AllTrialsFailed { trials: usize },

    #[error("cannot parse complex number: offending token `{token}`")]
    ParseComplex { token: String },

    #[error("malformed {kind} file {path}: {detail}")]
    Format {
        kind: &'static str,
        path: PathBuf,
        detail: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
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
