use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("change-of-basis matrix is singular (condition number {condition:.3e})")]
    SingularBasis { condition: f64 },

    #[error("structured form does not reproduce the dense matrix (relative error {rel_error:.3e})")]
    StructureMismatch { rel_error: f64 },

    #[error("I - lambda*B is singular at lambda = {lambda}; nearest characteristic number {pole}")]
    SingularResolvent { lambda: Complex64, pole: Complex64 },

    #[error("operator is singular: eigenvalue {mu} has no characteristic number")]
    ZeroEigenvalue { mu: Complex64 },

    #[error("Jordan chain construction failed (worst residual {residual:.3e}); supply a structured form")]
    ChainResidual { residual: f64 },

    #[error("biorthogonal pairing is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedPairing { condition: f64 },

    #[error("decomposition has no biorthogonal system; call build_biorthogonal first")]
    MissingAdjointSystem,

    #[error("circle of radius {radius} around {center} encloses or touches eigenvalue {foreign}")]
    ForeignEigenvalue {
        center: Complex64,
        radius: f64,
        foreign: Complex64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit window too small: {points} usable points, need {required}")]
    HorizonTooSmall { points: usize, required: usize },

    #[error("tail integral diverges: {0}")]
    TailDivergence(String),

    #[error("zero entry in the zero sequence at index {index}")]
    ZeroInSequence { index: usize },

    #[error("all scanned circles pass through characteristic numbers")]
    NoAdmissibleCircle,

    #[error("polynomial degree {m} exceeds the cap {cap}")]
    DegreeCap { m: usize, cap: usize },

    #[error("coefficient numbering does not match the decomposition: {0}")]
    Misaligned(String),

    #[error("contour error: {0}")]
    Contour(String),

    #[error("quadrature did not converge: error {estimate:.3e} above tolerance {tolerance:.3e} after {panels} panels")]
    QuadratureNonConvergence {
        estimate: f64,
        tolerance: f64,
        panels: usize,
    },

    #[error("integrand does not decay along x: {0}")]
    NonDecaying(String),

    #[error("horizon {horizon} insufficient: tail bound {tail:.3e} above tolerance {tolerance:.3e}")]
    HorizonInsufficient {
        horizon: f64,
        tail: f64,
        tolerance: f64,
    },

    #[error("operator is not normal (off-diagonal Schur mass {offdiag:.3e})")]
    NotNormal { offdiag: f64 },
}
