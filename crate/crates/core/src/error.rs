use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the formula it feeds.
    #[error("{name} {requirement} (got {value})")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    /// `π = 1` together with `σ = 0`: the optimal penalty degenerates to `λ* = 0`.
    #[error("optimal penalty is degenerate for pi = 1 and sigma = 0 (lambda* = 0 lies outside (0, inf))")]
    DegenerateOptimum,

    #[error("{0}")]
    Degenerate(String),

    #[error("root finder did not converge after {iterations} iterations; final bracket [{lo:e}, {hi:e}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cholesky factorization failed: {0}")]
    Factorization(String),

    #[error("activation is not centered: E[sigma(Z)] = {mean:e}")]
    NotCentered { mean: f64 },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// An error raised inside one cell of a sweep or fit grid.
    #[error("{context}: {source}")]
    Cell {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::Domain {
            name,
            requirement,
            value,
        }
    }

    pub(crate) fn in_cell(self, context: impl Into<String>) -> Self {
        Error::Cell {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, "must be a finite positive number", value))
    }
}
