use thiserror::Error;

/// Errors raised by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    Pole(f64),
    #[error("overflow evaluating {what} at x = {x}")]
    Overflow { what: &'static str, x: f64 },
    #[error("{what}: no convergence after {terms} terms")]
    NoConvergence { what: &'static str, terms: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("value at the base point t = {0} is singular")]
    SingularAtBase(f64),
    #[error("degenerate coefficient k = {0}: use the k = 1 family")]
    DegenerateK(f64),
    #[error("Talbot contour unsuitable: node terms grow (amplification {0:e})")]
    Oscillation(f64),
    #[error("quadratic branch selection is ambiguous at s = {0}")]
    BranchAmbiguity(String),
    #[error("quadratic discriminant vanishes at s = {0}")]
    DiscriminantZero(String),
    #[error("Riccati recursion denominator 2 Q a0 - B/(1-alpha) vanishes")]
    DenominatorZero,
    #[error("Riccati leading coefficient is complex: -P/Q = {0} < 0")]
    ComplexRoot(f64),
}

impl Error {
    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::InvalidParams(_) | Error::DegenerateK(_) | Error::ComplexRoot(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
