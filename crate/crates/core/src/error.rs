use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("cannot decode image {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("no foreground: image cannot be segmented into leaf and background")]
    NoForeground,

    #[error("degenerate radius: maximum radius or DC term is zero")]
    DegenerateRadius,

    #[error("degenerate shape: {0}")]
    DegenerateShape(&'static str),

    #[error("empty co-occurrence matrix: no valid pixel pair for offset")]
    EmptyGlcm,

    #[error("no direction produced a valid co-occurrence matrix")]
    AllDirectionsEmpty,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image dimensions {found:?} do not match {expected:?}")]
    SizeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("training set has a single class; at least two are required")]
    SingleClass,

    #[error("smoothing factor must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset is empty: {0}")]
    EmptyDataset(PathBuf),

    #[error("class {0:?} has no images")]
    ClassWithNoImages(String),

    #[error("class {class:?} has {available} images, {required} required")]
    InsufficientImages {
        class: String,
        available: usize,
        required: usize,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("unknown feature group {0:?}")]
    UnknownFeatureGroup(String),

    #[error("unsupported model format version {0}")]
    UnknownFormatVersion(u32),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short variant name used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::FileNotFound(_) => "FileNotFound",
            Error::Decode { .. } => "DecodeError",
            Error::NoForeground => "NoForeground",
            Error::DegenerateRadius => "DegenerateRadius",
            Error::DegenerateShape(_) => "DegenerateShape",
            Error::EmptyGlcm => "EmptyGlcm",
            Error::AllDirectionsEmpty => "AllDirectionsEmpty",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::EmptyTrainingSet => "EmptyTrainingSet",
            Error::SingleClass => "SingleClass",
            Error::NonPositiveSigma(_) => "NonPositiveSigma",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EmptyDataset(_) => "EmptyDataset",
            Error::ClassWithNoImages(_) => "ClassWithNoImages",
            Error::InsufficientImages { .. } => "InsufficientImages",
            Error::Manifest(_) => "ManifestError",
            Error::UnknownFeatureGroup(_) => "UnknownFeatureGroup",
            Error::UnknownFormatVersion(_) => "UnknownFormatVersion",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "JsonError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
