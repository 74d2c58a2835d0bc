use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate dimension `{0}`: max equals min")]
    DegenerateDimension(&'static str),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("row {0} has no measured outputs")]
    MissingOutputs(usize),

    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLength { got: usize, expected: usize },

    #[error("hidden size must be at least 1")]
    InvalidHidden,

    #[error("row count mismatch: {0} actual rows vs {1} simulated rows")]
    RowMismatch(usize, usize),

    #[error("input mismatch at row {0}")]
    InputMismatch(usize),

    #[error("missing pair member {0}")]
    MissingPairMember(String),

    #[error("no training mean for group {0}")]
    MissingGroupMean(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("unsupported snapshot version `{0}`")]
    SnapshotVersion(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 1 I/O, 2 invalid input or config,
    /// 3 snapshot incompatibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::Snapshot(_) | Error::SnapshotVersion(_) => 3,
            _ => 2,
        }
    }
}
