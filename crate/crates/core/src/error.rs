use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A truncated series or quadrature could not reach its tolerance.
    #[error("precision error: achieved bound {achieved:e} exceeds target {target:e}{}", hint.as_ref().map(|h| format!(" ({h})")).unwrap_or_default())]
    Precision {
        achieved: f64,
        target: f64,
        hint: Option<String>,
    },

    /// A quotient whose denominator vanished within tolerance.
    #[error("degenerate quotient: {0}")]
    Degenerate(String),

    /// Coordinate singularity of a Hamiltonian or chart.
    #[error("coordinate singularity: {0}")]
    Singular(String),

    /// The integrator could not keep the energy drift inside its budget.
    #[error("step rejected: relative energy drift {drift:e} after {halvings} step halvings")]
    StepRejected { drift: f64, halvings: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
