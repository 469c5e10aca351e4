use crate::numerics::NumError;
use thiserror::Error;

/// Failure modes shared by weight construction, interpolation and solvers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("nodes {first} and {second} are not separated")]
    DegenerateNodes { first: usize, second: usize },
    #[error("derivative at sample {index} is zero")]
    ZeroDerivative { index: usize },
    #[error("evaluation point coincides with node {index}")]
    EvaluationAtNode { index: usize },
    #[error("interpolant denominator vanishes")]
    SingularDenominator,
    /// Some stored sample is already an exact root; not a failure.
    #[error("sample {index} is an exact root")]
    ExactRootHit { index: usize },
    #[error("iteration step is singular")]
    SingularStep,
    #[error("derivative of order {order} is unavailable")]
    MissingDerivative { order: usize },
    #[error("not enough usable data")]
    InsufficientData,
    #[error("no leading-error factor is tabulated for this scheme and memory")]
    UnsupportedCell,
    #[error("refinement did not converge")]
    NonConvergence,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

impl Error {
    /// Stable variant name, used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateNodes { .. } => "DegenerateNodes",
            Error::ZeroDerivative { .. } => "ZeroDerivative",
            Error::EvaluationAtNode { .. } => "EvaluationAtNode",
            Error::SingularDenominator => "SingularDenominator",
            Error::ExactRootHit { .. } => "ExactRootHit",
            Error::SingularStep => "SingularStep",
            Error::MissingDerivative { .. } => "MissingDerivative",
            Error::InsufficientData => "InsufficientData",
            Error::UnsupportedCell => "UnsupportedCell",
            Error::NonConvergence => "NonConvergence",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Numeric(NumError::Domain { .. }) => "DomainError",
            Error::Numeric(_) => "NumericError",
        }
    }
}
