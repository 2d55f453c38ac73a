use std::io;

/// Everything that can go wrong between reading an image and exporting segments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image is {width}x{height}, kernel needs at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("curve does not cross the image window")]
    CurveOutsideWindow,

    #[error("affine map is singular (det = {0})")]
    SingularMap(f64),

    #[error("no {0} response anywhere in the image")]
    NoSignal(&'static str),

    #[error("no support region reaches the minimum area of {0} pixels")]
    NoRegions(usize),

    #[error("region {label} is unusable: {reason}")]
    UnusableRegion { label: u32, reason: String },

    #[error("contour has {got} points, need at least {need}")]
    ContourTooShort { got: usize, need: usize },

    #[error("every curvature sample is degenerate")]
    DegenerateCurve,

    #[error("unknown export format `{0}`")]
    UnknownFormat(String),

    #[error("malformed image: {0}")]
    Decode(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
