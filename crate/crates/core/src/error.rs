//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("snapshot ordinal {index} out of range 1..={max}")]
    SnapshotOutOfRange { index: usize, max: usize },

    #[error("vertex id {id} out of range for n={n}")]
    VertexOutOfRange { id: usize, n: usize },

    #[error("self-pair ({0},{0}) is not a valid node-pair")]
    SelfPair(usize),

    #[error("invalid snapshot range [{from},{to}] for t={t}")]
    InvalidRange { from: usize, to: usize, t: usize },

    #[error("all {total} vertices were filtered out (min_active_snapshots={min_active}, min_degree={min_degree})")]
    AllVerticesFiltered {
        total: usize,
        min_active: usize,
        min_degree: usize,
    },

    #[error("duplicate pair ({0},{1}) in pair list")]
    DuplicatePair(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged: loss became non-finite at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("dataset has a single class; need both positive and negative examples")]
    SingleClass,

    #[error("not enough negative pairs: requested {requested}, available {available}")]
    NotEnoughNegatives { requested: usize, available: usize },

    #[error("ranked scores need at least one positive and one negative entry")]
    DegenerateRanking,

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("window size {size} exceeds the maximum usable size {max}")]
    WindowTooLarge { size: usize, max: usize },

    #[error("parse error in {file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
