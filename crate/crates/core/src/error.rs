use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("emitter cell {cell} out of range 1..={n_cells}")]
    CellOutOfRange { cell: usize, n_cells: usize },

    #[error("operation requires {required} boundary conditions")]
    WrongBoundary { required: &'static str },

    #[error("operation requires t1 == t2 (got t1 = {t1}, t2 = {t2})")]
    NonUniformHopping { t1: f64, t2: f64 },

    #[error("operation requires gamma = 2 t1 (got gamma = {gamma}, t1 = {t1})")]
    NotAtExceptionalPoint { gamma: f64, t1: f64 },

    #[error("operation requires gamma > 0")]
    Lossless,

    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("linear system is singular or ill-conditioned (residual {residual:.3e})")]
    Singular { residual: f64 },

    #[error("pole of the Bloch resolvent coincides with an N-th root of unity")]
    PoleOnContour,

    #[error("reference energy lies on the spectral curve (min |det| = {min_abs_det:.3e})")]
    OnSpectralCurve { min_abs_det: f64 },

    #[error("time grid must be increasing and start at 0")]
    InvalidTimeGrid,

    #[error("propagator tolerance {tol:.1e} not reached (estimated error {achieved:.3e})")]
    ToleranceNotReached { tol: f64, achieved: f64 },

    #[error("averaging window {t_av} exceeds trajectory span {span}")]
    WindowTooLong { t_av: f64, span: f64 },

    #[error("dressed state: {0}")]
    Dressed(String),

    #[error("eigendecomposition failed to converge")]
    NoConvergence,
}
