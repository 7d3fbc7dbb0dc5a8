use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input bytes do not follow the expected container layout.
    #[error("format error: {0}")]
    Format(String),
    /// Payload shorter than its header announces.
    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty evaluation set")]
    EmptySet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Point lies behind a pinhole camera.
    #[error("point is behind the camera")]
    BehindCamera,
    /// Ray or radius outside the supported range of a fisheye model.
    #[error("outside camera model range: {0}")]
    OutOfModel(String),
    #[error("iteration did not converge: {0}")]
    Convergence(String),
    #[error("unknown dataset id `{0}`")]
    UnknownDataset(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
