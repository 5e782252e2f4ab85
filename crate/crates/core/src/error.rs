use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument `{name}` has dimension {found}, expected {expected}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("unsupported structure: {0}")]
    Unsupported(String),
    #[error("frame is not orthonormal: deviation {deviation:e} exceeds {tolerance:e}")]
    NotOrthonormal { deviation: f64, tolerance: f64 },
    #[error("vector is not normal to the plane: component {component:e} exceeds {tolerance:e}")]
    NotNormal { component: f64, tolerance: f64 },
    #[error("immersion condition violated at sample {sample}: smallest singular value {sigma:e}")]
    NotImmersed { sample: usize, sigma: f64 },
    #[error("degenerate grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tangent vectors live at different base immersions")]
    BaseMismatch,
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("mean curvature is undefined for a point immersion")]
    PointImmersion,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
