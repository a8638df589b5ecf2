use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QbmError>;

#[derive(Debug, Error)]
pub enum QbmError {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),

    #[error("noise requested on a pure-state register; use the mixed backend")]
    NoiseOnPureState,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("probability vector is not normalized (sum = {sum})")]
    Unnormalized { sum: f64 },

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{n} nodes exceeds the enumeration limit of {limit}")]
    EnumerationLimit { n: usize, limit: usize },

    #[error("malformed bitstring {0:?}")]
    MalformedBitstring(String),

    #[error("grid format error: {0}")]
    Grid(String),

    #[error("expected {expected} blocks, got {got}")]
    BlockCount { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("malformed record {path}: {reason}")]
    MalformedRecord { path: PathBuf, reason: String },

    #[error("checksum mismatch for {0}")]
    ChecksumMismatch(PathBuf),

    #[error("nothing to archive")]
    EmptyArchive,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
