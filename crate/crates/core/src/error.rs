use thiserror::Error;

/// Errors surfaced by the library. Numerical failures are always explicit;
/// no operation silently returns wrong values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frequency outside the band: ||omega|| = {norm}, cutoff = {cutoff}")]
    OutOfBand { norm: f64, cutoff: f64 },

    #[error("no recorded sample at the queried frequency")]
    UnrecordedSample,

    #[error("SVD did not converge")]
    SvdNoConvergence,

    #[error("insufficient projections: only {kept} direction(s) passed the count gate")]
    InsufficientProjections { kept: usize },

    #[error("matching failure: no accepted candidate for projected source {source_index}")]
    MatchingFailure { source_index: usize },

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("could not place sources: d_min = {d_min} infeasible inside the admissible ball")]
    GeometryInfeasible { d_min: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
