use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate spectrum: eigenvalue {value} has {candidates} adjoint partners within {tolerance:e}")]
    DegenerateSpectrum {
        value: String,
        candidates: usize,
        tolerance: f64,
    },

    #[error("exceptional point: left/right overlap {overlap:e} for eigenvalue {value}")]
    ExceptionalPoint { value: String, overlap: f64 },

    #[error("truncation too small: found {found} quasienergies in the first zone (expected 2)")]
    TruncationTooSmall { found: usize },

    #[error("band tracking failed between k = {k_from} and k = {k_to} (best overlap {overlap:.3})")]
    TrackingFailure { k_from: f64, k_to: f64, overlap: f64 },

    #[error("winding undefined for band {band}: raw winding {raw:.6}, residual {residual:.3e}")]
    WindingUndefined { band: usize, raw: f64, residual: f64 },

    #[error("lattice too small: amplitude reached the outer cells at t = {time:.4}; try n_cells >= {suggested}")]
    LatticeTooSmall { time: f64, suggested: usize },

    #[error("norm increased between t = {t_prev:.4} and t = {t_next:.4} ({prev:e} -> {next:e})")]
    NonMonotoneNorm {
        t_prev: f64,
        t_next: f64,
        prev: f64,
        next: f64,
    },

    #[error("zero monodromy eigenvalue (total absorption)")]
    ZeroMultiplier,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
