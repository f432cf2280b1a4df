use crate::graph::{EdgeId, VertexId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),

    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),

    #[error("self-loops are forbidden: {0}")]
    SelfLoop(VertexId),

    #[error("vertex {0} is not black")]
    NotBlack(VertexId),

    #[error("vertex {0} is not isolated")]
    NotIsolated(VertexId),

    #[error("edge {0} does not join two white vertices")]
    NotWhiteWhite(EdgeId),

    #[error("graph has an edge between black vertices ({0}); subdivide first")]
    BlackBlackEdge(EdgeId),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("flow network is malformed: {0}")]
    MalformedNetwork(String),

    #[error("flow assignment is inconsistent: {0}")]
    InconsistentFlow(String),

    #[error("no packing exists: {0}")]
    NoPacking(String),

    #[error("terminal pair multiplicity {found} is below threshold {threshold}; input is not a valid reduced planar instance (non-planar input or connectivity below k)")]
    ThresholdViolation { found: usize, threshold: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("instance too large for brute-force oracle: {0}")]
    OracleSizeExceeded(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
