use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the fitting and inference pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{routine}: argument {value} outside domain ({expected})")]
    Domain {
        routine: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{routine}: no convergence after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("beta MLE did not converge (last iterate alpha={alpha}, beta={beta})")]
    BetaFit { alpha: f64, beta: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{path}: line {line}: cannot parse {content:?} as a number")]
    Parse {
        path: PathBuf,
        line: usize,
        content: String,
    },

    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(routine: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            routine,
            value,
            expected,
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
