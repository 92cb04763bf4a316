use thiserror::Error;

/// Failures raised by the numerical pipeline.
///
/// Nodal points are not errors: an undefined phase is reported through
/// [`crate::offdiag::NodalDiagnosis`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("gauge isometry does not preserve the state (deviation {deviation:.3e})")]
    SupportMismatch { deviation: f64 },

    #[error("not a partial isometry (deviation {deviation:.3e})")]
    NotPartialIsometry { deviation: f64 },

    #[error("not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("time {t} outside [0, {duration}]")]
    OutOfRange { t: f64, duration: f64 },

    #[error("time {t} is not a sample point of the sampled evolution")]
    GridMiss { t: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("path needs at least two states, got {0}")]
    PathTooShort(usize),

    #[error("vanishing transition probability {transition_probability:.3e} at step {step}")]
    OrthogonalStep {
        step: usize,
        transition_probability: f64,
    },

    #[error("state rank changes along the path at step {step} ({expected} -> {found})")]
    RankChange {
        step: usize,
        expected: usize,
        found: usize,
    },

    #[error("grid too coarse for finite differences ({0} points, need at least 3)")]
    GridTooCoarse(usize),

    #[error("operator vanishes within tolerance")]
    ZeroOperator,

    #[error("left and right polar isometries disagree (deviation {deviation:.3e})")]
    Inconsistent { deviation: f64 },

    #[error("negative mixture weight {0}")]
    NegativeWeight(f64),

    #[error("operation requires the {0} variant")]
    WrongVariant(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
