use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PFM ({field}): {detail}")]
    PfmFormat { field: &'static str, detail: String },
    #[error("non-finite radiance at pixel ({x}, {y})")]
    NonFiniteRadiance { x: usize, y: usize },
    #[error("negative radiance {value} at pixel ({x}, {y})")]
    NegativeRadiance { x: usize, y: usize, value: f64 },
    #[error("degenerate scene: maximum radiance is zero")]
    DegenerateScene,
    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },
    #[error("empty histogram")]
    EmptyHistogram,
    #[error("image {width}x{height} too small for {levels} pyramid levels (need at least {min} px per side)")]
    ImageTooSmall {
        width: usize,
        height: usize,
        levels: usize,
        min: usize,
    },
    #[error("no jointly valid pixels between estimate and ground truth")]
    NoValidPixels,
    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },
    #[error("scenario hash mismatch: {expected} vs {found}")]
    ScenarioMismatch { expected: String, found: String },
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_w: a.0,
            left_h: a.1,
            right_w: b.0,
            right_h: b.1,
        }
    }

    /// Tags an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
