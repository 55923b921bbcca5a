use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad arguments or configuration.
    Input,
    /// A hypothesis required by the theory does not hold for the instance.
    Hypothesis,
    /// A solver failed or a quantity left the representable range.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at node {node} (x = {x:?})")]
    Overflow { node: usize, x: [f64; 3] },

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:e})")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("operator is not positive definite (curvature {curvature:e} at iteration {iteration})")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("eigensolver did not converge: {0}")]
    EigenNonConvergence(String),

    #[error("factorization breakdown: zero pivot at row {row}")]
    FactorizationBreakdown { row: usize },

    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("hypothesis violated: {what} (value {value:e})")]
    HypothesisViolation { what: String, value: f64 },

    #[error("solution blew up: L2 norm {norm:e} exceeded threshold after t = {last_finite_time}")]
    BlowUp { last_finite_time: f64, norm: f64 },

    #[error("degenerate tangent bundle: R[{index}][{index}] = {value:e}")]
    DegenerateBundle { index: usize, value: f64 },

    #[error("time {0} is not on the trajectory lattice")]
    OffLattice(f64),

    #[error("missing constant `{0}`")]
    MissingConstant(String),

    #[error("constant `{0}` has no provenance")]
    MissingProvenance(String),

    #[error("quadrature failed to reach tolerance at node {node}")]
    Quadrature { node: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed field file: {0}")]
    Format(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::HypothesisViolation { .. } => ErrorClass::Hypothesis,
            Error::InvalidDomain(_)
            | Error::GridMismatch(_)
            | Error::InvalidArgument(_)
            | Error::OffLattice(_)
            | Error::MissingConstant(_)
            | Error::MissingProvenance(_)
            | Error::Io(_)
            | Error::Format(_) => ErrorClass::Input,
            _ => ErrorClass::Numerical,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
