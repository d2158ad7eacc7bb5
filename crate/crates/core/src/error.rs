use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("TIFF error in {path}: {message}")]
    Tiff { path: PathBuf, message: String },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: missing georeferencing ({missing})")]
    MissingGeoref {
        path: PathBuf,
        missing: &'static str,
    },

    #[error("grid {index} is not aligned with grid 0: {reason}")]
    Misaligned { index: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("image fully occluded: no clear pixel to interpolate from")]
    FullyOccluded,

    #[error("no admissible reference frames for {0}")]
    NoReferences(NaiveDate),

    #[error("occlusion factor {theta:.4} exceeds serviceability bound (theta must be < {bound})")]
    ServiceabilityExceeded { theta: f64, bound: f64 },

    #[error("evaluation mask selects no pixels")]
    EmptyMask,

    #[error("could not place any {size}x{size} occlusion square")]
    NoPlacement { size: usize },

    #[error("non-positive radicand {radicand} when inverting station flux")]
    NonPositiveRadicand { radicand: f64 },

    #[error("scene dated {0} not found in catalog")]
    UnknownDate(NaiveDate),

    #[error("duplicate scene date {0}")]
    DuplicateDate(NaiveDate),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
