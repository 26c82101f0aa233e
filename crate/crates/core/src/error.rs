use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("plane mismatch: z = {a} vs z = {b}")]
    PlaneMismatch { a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Fresnel propagation needs a non-zero distance")]
    ZeroDistance,

    #[error("object at the focal plane has no conjugate image")]
    AtFocus,

    #[error("object inside the focal length forms a virtual image")]
    VirtualImage,

    #[error("depth {depth} m is not beyond the focal length {focal_length} m")]
    DepthTooClose { depth: f64, focal_length: f64 },

    #[error("slice extent {extent} m exceeds grid width {grid} m")]
    ExtentTooLarge { extent: f64, grid: f64 },

    #[error("reference tilt frequency {frequency:.6e} cycles/m exceeds Nyquist {nyquist:.6e}")]
    TiltAliased { frequency: f64, nyquist: f64 },

    #[error("mask clamped (pre-clamp transmittance reached {max_transmittance}); the three-term expansion does not hold")]
    ClampedRegime { max_transmittance: f64 },

    #[error("term expansion requires a uniform-amplitude reference")]
    NonUniformReference,

    #[error("window lies outside the grid")]
    WindowOutsideGrid,

    #[error("input has zero variance")]
    ZeroVariance,

    #[error("carrier {carrier:.6e} cycles/m is zero or not below Nyquist {nyquist:.6e}")]
    CarrierAliased { carrier: f64, nyquist: f64 },

    #[error("region of interest is empty")]
    EmptyRoi,

    #[error("{path}: parse error at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image header: {0}")]
    CorruptHeader(String),

    #[error("field dump header mismatch: {0}")]
    HeaderMismatch(String),

    #[error("field dump payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
