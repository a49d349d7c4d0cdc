use thiserror::Error;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point is not on the boundary (|F(x)| = {residual:.3e})")]
    NotOnBoundary { residual: f64 },
    #[error("degenerate boundary point: gradient of the defining function vanishes")]
    DegenerateBoundary,
    #[error("boundary is not smooth at this point")]
    NonSmoothBoundary,
    #[error("body is unbounded")]
    Unbounded,
    #[error("potential is not radial")]
    NotRadial,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("root bracketing failed: {0}")]
    RootBracket(String),
    #[error("truncation did not converge: {coarse} at r_max = {r_max} vs {fine} at 2 r_max")]
    Truncation { coarse: f64, fine: f64, r_max: f64 },
    #[error("weight is not positive at r = {at} (w = {value})")]
    WeightNotPositive { at: f64, value: f64 },
    #[error("Galerkin basis is numerically singular")]
    EmptyBasis,
    #[error("sample data: {0}")]
    Samples(String),
    #[error("descriptor: {0}")]
    Descriptor(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GapError>;

pub(crate) fn invalid(msg: impl Into<String>) -> GapError {
    GapError::InvalidParameter(msg.into())
}
