use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// The variants split into two families: input problems (bad parameters,
/// domain violations, malformed configuration) and numerical failures
/// (a series, quadrature or iteration that did not settle). The CLI maps
/// the first family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),

    #[error("overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("{what}: argument {arg} outside the domain ({reason})")]
    Domain {
        what: &'static str,
        arg: f64,
        reason: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series diverges: convergence margin {margin} must exceed -1")]
    Divergent { margin: f64 },

    #[error("{what} did not converge within {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("quadrature did not converge on [{a}, {b}] after {depth} bisections")]
    Quadrature { a: f64, b: f64, depth: usize },

    #[error("implicit step at t = {t} did not converge")]
    Newton { t: f64 },

    #[error("implicit step at t = {t} is singular (coefficient {coefficient})")]
    SingularStep { t: f64, coefficient: f64 },

    #[error("operator is not a contraction: q = {q}")]
    NonContraction { q: f64 },

    #[error("fixed-point iteration stopped after {iterations} iterations (last delta {delta})")]
    IterationLimit { iterations: usize, delta: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::NonConvergence { .. }
                | Error::Quadrature { .. }
                | Error::Newton { .. }
                | Error::SingularStep { .. }
                | Error::NonContraction { .. }
                | Error::IterationLimit { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
