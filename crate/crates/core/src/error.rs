use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible planes: {0}")]
    IncompatiblePlanes(String),

    #[error("frame is not orthonormal (deviation {deviation:.3e})")]
    FrameNotOrthonormal { deviation: f64 },

    #[error("empty closed-set sample")]
    EmptySample,

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("nonpositive count: {0}")]
    NonpositiveCount(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("perturbation of size {delta} exceeds tube of radius {radius}")]
    ExceedsTube { delta: f64, radius: f64 },

    #[error("no normal field available: {0}")]
    NoNormalField(String),

    #[error("unsupported MFD version: {0}")]
    Version(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: frame row {row} is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { line: usize, row: usize, deviation: f64 },

    #[error("degenerate neighborhood at vertex {vertex}: rank {rank} < {dim}")]
    DegenerateNeighborhood { vertex: usize, rank: usize, dim: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too large: {points} points (limit {limit})")]
    GridTooLarge { points: usize, limit: usize },

    #[error("missing labels")]
    MissingLabels,

    #[error("domain mismatch")]
    DomainMismatch,

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
