use thiserror::Error;

/// Errors raised by the numerical routines and the problem loader.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A special-function evaluation did not reach its accuracy target.
    /// `best` carries the best estimate that was available.
    #[error("accuracy error: {message} (best estimate {best})")]
    Accuracy { message: String, best: f64 },

    #[error("stencil error: {0}")]
    Stencil(String),

    #[error("state error: {0}")]
    State(String),

    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    /// Picard iteration hit its cap. `ratios` is the history of successive
    /// difference ratios, which shows whether the map failed to contract.
    #[error("no convergence after {iterations} iterations (last difference {last_difference:e})")]
    NonConvergence {
        iterations: usize,
        last_difference: f64,
        ratios: Vec<f64>,
    },

    #[error("segment {segment}: {source}")]
    Segment {
        segment: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_segment(self, segment: impl Into<String>) -> Self {
        Error::Segment {
            segment: segment.into(),
            source: Box::new(self),
        }
    }
}
