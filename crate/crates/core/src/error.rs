use thiserror::Error;

use crate::stokes::ValidationReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StokesError {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("factors are equal: {0}")]
    EqualFactors(String),

    #[error("direction is not generic: factors {0} and {1} are incomparable")]
    NotGeneric(String, String),

    #[error("direction lies on a Stokes direction of {0} and {1}")]
    OnStokesDirection(String, String),

    #[error("evaluation point {0} is not admissible: {1}")]
    NotAdmissible(String, String),

    #[error("invalid Stokes data: {0}")]
    InvalidData(ValidationReport),

    #[error("convention violation: {0}")]
    ConventionViolation(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular")]
    Singular,

    #[error("pairing is not compatible with the Stokes maps (residual {residual:.3e})")]
    IncompatiblePairing { residual: f64 },

    #[error("pairing is not block-diagonal with invertible blocks: {0}")]
    BadPairing(String),

    #[error("pairing is not ι-skew-Hermitian (residual {residual:.3e})")]
    NotSkew { residual: f64 },

    #[error("form on K at factor index {0} is degenerate")]
    DegenerateKForm(usize),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("generator could not satisfy constraints: {0}")]
    Unsatisfiable(String),

    #[error("loop is singular at sample {0}")]
    SingularLoop(usize),

    #[error("kernel dimensions did not stabilize below truncation cap {0}")]
    NotStabilized(usize),

    #[error("bad parameters: {0}")]
    BadParams(String),
}

pub type Result<T> = std::result::Result<T, StokesError>;
