use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("ill-conditioned center/stable split: {0}")]
    IllConditionedSplit(String),

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("degenerate interconnection spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("indeterminate classification: {0}")]
    Indeterminate(String),

    #[error("no synchronization guarantee: {0}")]
    NoGuarantee(String),

    #[error("integrator inconsistency: {0}")]
    IntegratorInconsistency(String),
}

impl Error {
    /// True for failures that stem from floating-point behaviour rather than
    /// from the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_)
                | Error::IllConditionedSplit(_)
                | Error::Convergence(_)
                | Error::IntegratorInconsistency(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
