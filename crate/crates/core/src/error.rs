use std::path::PathBuf;

use thiserror::Error;

use crate::item::ItemId;

/// Errors raised by graph construction, search and partitioning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("payload kind {payload} does not match measure {measure}")]
    PayloadMismatch {
        measure: &'static str,
        payload: &'static str,
    },

    #[error("similarity budget of {budget} evaluations exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("similarity budget {budget} cannot hold k={k} results")]
    BudgetTooSmall { budget: u64, k: usize },

    #[error("building a {k}-nn graph needs more than {k} items, got {n}")]
    InsufficientItems { n: usize, k: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("partition {index} has no nodes")]
    EmptyPartition { index: usize },

    #[error("duplicate item id {0}")]
    DuplicateId(ItemId),

    #[error("item id {0} not found")]
    UnknownItem(ItemId),

    #[error("graph has {n} nodes, online insertion needs at least k={k}")]
    GraphTooSmall { n: usize, k: usize },

    #[error("{p} partitions with capacity {capacity} cannot hold {n} nodes")]
    CapacityInfeasible {
        p: usize,
        capacity: usize,
        n: usize,
    },

    #[error("graphs cover different node sets or use different k")]
    NodeSetMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
