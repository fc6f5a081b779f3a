use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported or corrupt image: {0}")]
    Format(String),

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    Shape {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("image too small: {width}x{height}, need at least {min_width}x{min_height}")]
    TooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },

    #[error("undefined baseline: reference image produced zero matches")]
    UndefinedBaseline,

    #[error("config error: {0}")]
    Config(String),

    #[error("dataset layout error: {0}")]
    DatasetLayout(String),

    #[error("report error: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(a: (usize, usize), b: (usize, usize)) -> Self {
        Error::Shape {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Format(_)
                | Error::Shape { .. }
                | Error::InvalidValue(_)
                | Error::InvalidParameter(_)
                | Error::TooSmall { .. }
                | Error::Config(_)
                | Error::DatasetLayout(_)
        )
    }
}
