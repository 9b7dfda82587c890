use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty Kraus family")]
    EmptyKraus,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("map is not unital: residual {residual:e} exceeds {tolerance:e}")]
    NotUnital { residual: f64, tolerance: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidState { reason: String },

    #[error("not a projection: residual {residual:e}")]
    NotProjection { residual: f64 },

    #[error("matrix is not Hermitian: residual {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("state is not invariant: residual {residual:e} exceeds {tolerance:e}")]
    NotInvariant { residual: f64, tolerance: f64 },

    #[error(
        "state is not faithful (min eigenvalue {min_eigenvalue:e}); reduce to its support first"
    )]
    NotFaithful { min_eigenvalue: f64 },

    #[error("projection is not sub-harmonic: min eigenvalue of tau(p) - p is {min_eigenvalue:e}")]
    NotSubharmonic { min_eigenvalue: f64 },

    #[error("subspace is not closed under products/adjoints: residual {residual:e}")]
    NotAnAlgebra { residual: f64 },

    #[error("subspace is not invariant under the modular group: residual {residual:e}")]
    NotModularInvariant { residual: f64 },

    #[error("verification of {check} failed: residual {residual:e} exceeds {tolerance:e}")]
    Verification {
        check: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("spectral and correlation verdicts disagree (spectral mixing: {spectral}, correlation witness {witness:e})")]
    VerdictMismatch { spectral: bool, witness: f64 },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("map is not completely positive: min Choi eigenvalue {min_eigenvalue:e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("dimension {requested} exceeds the configured cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("shift by {shift} moves time {time} beyond horizon {horizon}")]
    BeyondHorizon {
        shift: usize,
        time: usize,
        horizon: usize,
    },

    #[error("invariant states have non-comparable supports; reduction is ambiguous")]
    AmbiguousReduction,

    #[error("Popescu tensor violates the row-isometry relation: residual {residual:e}")]
    NotRowIsometry { residual: f64 },

    #[error("letter {letter} out of range for alphabet of size {d}")]
    LetterOutOfRange { letter: usize, d: usize },

    #[error("matrix is not unitary: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
