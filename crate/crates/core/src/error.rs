use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Resolution exceeds the cap, or an operation asked for a scale finer than the grid.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectral index {index} out of range for resolution m={m} (bound {bound})")]
    SpectrumOutOfRange { index: u64, m: u32, bound: u64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid interval [{start}, {end}): start must be below end")]
    InvalidInterval { start: u64, end: u64 },

    #[error("resolution mismatch: m={left} vs m={right}")]
    ResolutionMismatch { left: u32, right: u32 },

    #[error("non-finite grid value at cell ({j1}, {j2})")]
    NonFinite { j1: usize, j2: usize },

    #[error("invalid shift family: {}", .0.join("; "))]
    InvalidFamily(Vec<String>),

    #[error("invalid rectangle family: {}", .0.join("; "))]
    InvalidPartition(Vec<String>),

    #[error(
        "spectrum of function {index} leaks outside its rectangle (max coefficient {max_leak:e})"
    )]
    SpectrumLeak { index: usize, max_leak: f64 },

    #[error("ratio undefined: square-function norm is zero")]
    UndefinedRatio,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
