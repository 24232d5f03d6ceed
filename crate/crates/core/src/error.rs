use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{func}: argument outside domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("{0} is not available for custom families")]
    Unsupported(&'static str),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("series did not converge: {0}")]
    SeriesDivergence(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("continuation failed: {0}")]
    Continuation(String),

    #[error("extrapolation unstable: {0}")]
    Extrapolation(String),

    #[error("degenerate Monte Carlo cell: {0}")]
    DegenerateCell(String),

    #[error("empty estimate: {0}")]
    EmptyEstimate(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical machinery (series, quadrature,
    /// continuation, extrapolation) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SeriesDivergence(_)
                | Error::Quadrature(_)
                | Error::Continuation(_)
                | Error::Extrapolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
