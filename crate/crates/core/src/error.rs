use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::{Class, VectorKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("empty file: no samples to load")]
    EmptyFile,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),

    #[error("split leaves class {0} without training samples")]
    DegenerateSplit(Class),

    #[error("cannot compare a {left} vector with a {right} vector")]
    VariantMismatch { left: VectorKind, right: VectorKind },

    #[error("affinity is undefined for an empty vector")]
    EmptyVector,

    #[error("numeric vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("{0}")]
    InvalidRule(String),

    #[error("no {class} own-class samples to draw detectors from")]
    InsufficientSamples { class: Class },

    #[error(
        "no {class} detector survived generation \
         ({attempts} candidates, {censored} censored, {crowded} too close)"
    )]
    NoDetectorsGenerated {
        class: Class,
        attempts: usize,
        censored: usize,
        crowded: usize,
    },

    #[error("sample {id} is labeled {found}, expected {expected}")]
    ClassMismatch {
        id: String,
        expected: Class,
        found: Class,
    },

    #[error("cross-pruning removed all {pruned} spam detectors; raise cross_theta")]
    EmptySpamSet { pruned: usize },

    #[error("detector sets are incompatible: {0}")]
    IncompatibleSets(String),

    #[error("no decisions to tally")]
    EmptyInput,

    #[error("{0} is undefined: the denominator is zero")]
    DivisionByZero(&'static str),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("model file: {0}")]
    Model(String),

    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
