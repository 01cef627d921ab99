use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column {column}: cannot parse {value:?} as a finite number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("need at least {required} time points, got {found}")]
    TooFewSamples { required: usize, found: usize },

    #[error("lag order {lag} is invalid for a series of length {len}")]
    InvalidLag { lag: usize, len: usize },

    #[error("channel index {index} out of range for {channels} channels")]
    InvalidChannel { index: usize, channels: usize },

    #[error("invalid feature map `{token}`: {reason}")]
    InvalidSpec { token: String, reason: String },

    #[error("sinh overflow at coordinate {coordinate}: |sigma * x| = {magnitude} exceeds {limit}")]
    SinhOverflow {
        coordinate: usize,
        magnitude: f64,
        limit: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("class {class} has {count} samples, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: u8,
        count: usize,
        folds: usize,
    },

    #[error("each group needs at least {required} members, got {found}")]
    GroupSize { required: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair {source_channel}->{target_channel}: {inner}")]
    Pair {
        source_channel: usize,
        target_channel: usize,
        #[source]
        inner: Box<Error>,
    },

    #[error("run {run}: {inner}")]
    Run {
        run: usize,
        #[source]
        inner: Box<Error>,
    },

    #[error("grid point r={r}, eta={eta}, sigma={sigma}: {inner}")]
    Grid {
        r: usize,
        eta: f64,
        sigma: f64,
        #[source]
        inner: Box<Error>,
    },

    #[error("stage `{stage}`: {inner}")]
    Stage {
        stage: &'static str,
        #[source]
        inner: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

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

    /// True for errors caused by bad input rather than internal failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Json(_) => false,
            Error::Pair { inner, .. }
            | Error::Run { inner, .. }
            | Error::Grid { inner, .. }
            | Error::Stage { inner, .. } => inner.is_validation(),
            _ => true,
        }
    }
}
