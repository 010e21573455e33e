use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("operator is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("direction is not tangent at the point (residual {0:.3e})")]
    NotTangent(f64),
    #[error("line search stalled after {iterations} iterations at cost {cost:.6e}")]
    Stalled { iterations: usize, cost: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
    #[error("pulses need a logical factor of dimension 2^m, got {0}")]
    UnsupportedLogicalDim(usize),
    #[error("integrator step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pulse schedule: {0}")]
    Schedule(String),
}

pub type Result<T> = std::result::Result<T, Error>;
