use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("rows have different lengths")]
    RaggedRows,
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not normal")]
    NotNormal,
    #[error("matrices do not commute (defect {defect:.3e})")]
    NonCommuting { defect: f64 },
    #[error("simultaneous diagonalization failed after {attempts} attempts (residual {residual:.3e})")]
    DiagonalizationFailed { attempts: usize, residual: f64 },
    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },
    #[error("eigenvalue {min_eigenvalue:.3e} is too negative for a density matrix")]
    NotPositive { min_eigenvalue: f64 },
    #[error("vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("basis is not orthonormal (Gram residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("pure states are not orthogonal (overlap {overlap:.3e})")]
    NotOrthogonal { overlap: f64 },
    #[error("weights are not a probability vector: {0}")]
    InvalidWeights(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("Kraus operators are not trace preserving (‖ΣE†E − I‖ = {residual:.3e})")]
    NotTracePreserving { residual: f64 },
    #[error("map is not completely positive (Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },
    #[error("operators do not form a valid POVM: {0}")]
    InvalidPovm(String),
    #[error("channel is not unital (‖Λ(I) − I‖ = {residual:.3e})")]
    NotUnital { residual: f64 },
    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
}
