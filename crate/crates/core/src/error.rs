use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// Variants map one-to-one onto the error names printed by the CLI and the
/// status codes exported over the C ABI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("spectral function undefined at eigenvalue {eigenvalue}")]
    DomainError { eigenvalue: f64 },
    #[error("element is not positive (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("element is not strictly positive: {0}")]
    NotStrictlyPositive(String),
    #[error("element is not invertible (smallest |eigenvalue| {min_abs:e})")]
    NotInvertible { min_abs: f64 },
    #[error("not a projection: {0}")]
    NotProjection(String),
    #[error("not an effect: {0}")]
    NotEffect(String),
    #[error("not a symmetry: {0}")]
    NotSymmetry(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("element is not supported in the partial symmetry's support projection")]
    SupportViolation,
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("subspace does not contain the unit")]
    UnitMissing,
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("not a witness pair: {0}")]
    NotAWitnessPair(String),
    #[error("algebra is not a factor")]
    NotFactor,
    #[error("projections are not orthogonal")]
    NotOrthogonal,
    #[error("projection is zero")]
    ZeroProjection,
    #[error("symmetry does not exchange p and its orthocomplement (residual {residual:e})")]
    NotExchanging { residual: f64 },
    #[error("projection is 0 or 1")]
    TrivialProjection,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid tolerances: {0}")]
    InvalidTolerance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown command: {0}")]
    UnknownCommand(String),
}

impl Error {
    /// Stable identifier used in reports and on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DomainError { .. } => "DomainError",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotStrictlyPositive(_) => "NotStrictlyPositive",
            Error::NotInvertible { .. } => "NotInvertible",
            Error::NotProjection(_) => "NotProjection",
            Error::NotEffect(_) => "NotEffect",
            Error::NotSymmetry(_) => "NotSymmetry",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::SupportViolation => "SupportViolation",
            Error::AlgebraMismatch => "AlgebraMismatch",
            Error::UnitMissing => "UnitMissing",
            Error::PreconditionUnmet(_) => "PreconditionUnmet",
            Error::NotAWitnessPair(_) => "NotAWitnessPair",
            Error::NotFactor => "NotFactor",
            Error::NotOrthogonal => "NotOrthogonal",
            Error::ZeroProjection => "ZeroProjection",
            Error::NotExchanging { .. } => "NotExchanging",
            Error::TrivialProjection => "TrivialProjection",
            Error::HypothesisViolation(_) => "HypothesisViolation",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::Parse(_) => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::UnknownCommand(_) => "UnknownCommand",
        }
    }

    /// Input or usage problems, as opposed to mathematical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Validation(_)
                | Error::UnknownCommand(_)
                | Error::InvalidTolerance(_)
                | Error::AlgebraMismatch
        )
    }
}
