use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty record list")]
    EmptyDataset,

    #[error("record {index}: inconsistent dimensionality (expected {expected} features, found {found})")]
    InconsistentDimensionality {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("record {index}: label {label} outside ordinal scale with {levels} levels")]
    LabelOutOfScale { index: usize, label: i64, levels: u8 },

    #[error("record {index}: non-finite value in feature {feature}")]
    NonFiniteFeature { index: usize, feature: usize },

    #[error("unsupported ordinal scale with {0} levels (expected 2 or 3)")]
    UnsupportedScale(i64),

    #[error("{0}")]
    Parse(String),

    #[error("line {line}: {message}")]
    ParseLine { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("query '{0}' has no intercept in the model parameters")]
    UnknownQuery(String),

    #[error("model kind {kind} requires a {required}-level scale, dataset has {found}")]
    IncompatibleScale {
        kind: String,
        required: u8,
        found: u8,
    },

    #[error("intercept for query '{0}' does not match the model kind")]
    InterceptShape(String),

    #[error("non-finite objective at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cutoff must be at least 1")]
    InvalidCutoff,

    #[error("empty query group")]
    EmptyGroup,

    #[error("expected 5 folds, found {0}")]
    FoldCount(usize),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("report has no fold metrics")]
    EmptyReport,

    #[error("unknown report format '{0}' (expected csv or markdown)")]
    UnknownFormat(String),

    #[error("malformed model file: {0}")]
    ModelFile(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
