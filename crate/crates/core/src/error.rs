use std::path::PathBuf;

/// Errors produced anywhere in the motion pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pixel ({x}, {y}) is outside a {width}x{height} raster")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not enough {what}: need {needed}, have {available}")]
    Insufficient {
        what: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("shape mismatch at layer {layer}: {message}")]
    Shape { layer: usize, message: String },
    #[error("unknown video id `{0}`")]
    UnknownVideo(String),
    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
