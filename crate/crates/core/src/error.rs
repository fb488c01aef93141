use thiserror::Error;

/// Errors raised by the tiling, window, and frame routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is numerically singular (|det| = {det:e}, tolerance {tol:e})")]
    Singular { det: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tile exponent {value} exceeds the overflow guard ±{guard}")]
    TileRange { value: i64, guard: i64 },

    #[error("point lies within the boundary tolerance of a tile or region boundary")]
    Boundary,

    #[error("grid incompatible with the frame lattice: {0}")]
    GridIncompatible(String),

    #[error("frame operator symbol {symbol} fell below the lower frame bound {bound}")]
    SymbolBelowBound { symbol: f64, bound: f64 },

    #[error("frame algorithm diverged at iteration {iteration} (error {error:e} > {previous:e})")]
    Divergence {
        iteration: usize,
        error: f64,
        previous: f64,
    },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("all {0} samples were rejected as boundary points")]
    AllRejected(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
