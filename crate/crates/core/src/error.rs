use thiserror::Error;

use crate::graph::{Edge, VertexId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: VertexId, n: usize },
    #[error("edge {0} is both inserted and deleted in one batch")]
    ConflictingUpdate(Edge),
    #[error("duplicate priority {0}")]
    DuplicatePriority(u64),
    #[error("rank {rank} out of bounds for list of size {len}")]
    RankOutOfBounds { rank: usize, len: usize },
    #[error("no element with priority {0}")]
    PriorityAbsent(u64),
    #[error("offset sampling did not succeed within {0} rounds")]
    SamplingExhausted(usize),
    #[error("random key collision after initialization")]
    KeyCollision,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insert batch not allowed for a decremental structure")]
    InsertIntoDecremental,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
