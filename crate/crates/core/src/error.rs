use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid configuration: field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("degenerate steady state: {count} singular values below {threshold:.3e}")]
    DegenerateSteadyState { count: usize, threshold: f64 },

    #[error("integration failure at t = {time}: {message}")]
    Integration { time: f64, message: String },

    #[error("numerical consistency error: {0}")]
    Numerical(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("grid point {index}: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn at_point(self, index: usize) -> Self {
        Error::GridPoint {
            index,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Parse(_) | Error::Range(_) => true,
            Error::GridPoint { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
