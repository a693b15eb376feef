use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("point is not on the manifold (residual {0:e})")]
    OffManifold(f64),

    #[error("antipodal log undefined")]
    AntipodalLog,

    #[error("point orthogonal to slice")]
    OrthogonalToSlice,

    #[error("coordinate {0} outside [0, 1)")]
    CoordinateOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("unsupported genus {0}")]
    UnsupportedGenus(i64),

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("triangle inequality violated on face {0}")]
    TriangleInequality(usize),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
