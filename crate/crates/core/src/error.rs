use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = KnotError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum KnotError {
    #[error("non-finite coordinate")]
    NonFinite,

    #[error("degenerate segment (zero length)")]
    DegenerateSegment,

    #[error("coincident vertices")]
    CoincidentVertices,

    #[error("loop too small: component {component} has {len} vertices (need at least 3)")]
    LoopTooSmall { component: usize, len: usize },

    #[error("zero-length edge at component {component}, vertex {vertex}")]
    ZeroLengthEdge { component: usize, vertex: usize },

    #[error("edges intersect: component {c1} edge {e1} and component {c2} edge {e2}")]
    EdgesIntersect { c1: usize, e1: usize, c2: usize, e2: usize },

    #[error("no components")]
    Empty,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linking number undefined: {0}")]
    Linking(String),

    #[error("did not stabilize within {steps} steps")]
    NotConverged { steps: u64 },

    #[error("crossing invariant violated at step {step}: {detail}")]
    InvariantViolated { step: u64, detail: String },

    #[error("malformed knot file {path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("malformed knot file {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("transport: {0}")]
    Transport(String),

    #[error("unknown session {0}")]
    UnknownSession(u64),

    #[error("session {0} is closed")]
    SessionClosed(u64),
}

impl KnotError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        KnotError::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        KnotError::InvalidParameter(msg.into())
    }
}
