//! Error types shared across the crate.

use thiserror::Error;

/// Errors from graph construction, reservoir initialization, and readout fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("operation undefined on a graph with no edges")]
    NoEdges,

    #[error("node homophily undefined: every node is isolated")]
    AllNodesIsolated,

    #[error("node index {index} out of range for {num_nodes} nodes")]
    NodeOutOfRange { index: usize, num_nodes: usize },

    #[error("invalid compressed-row structure: {0}")]
    InvalidCsr(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "recurrent matrix draw is degenerate (estimated spectral radius 0) after {retries} retries"
    )]
    DegenerateReservoir { retries: usize },

    #[error("normal matrix is singular; use a regularization strength lambda > 0")]
    SingularSystem,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("mask selects no nodes")]
    EmptyMask,

    #[error("label array must cover all {expected} nodes, found {found}")]
    LabelLengthMismatch { expected: usize, found: usize },

    #[error("separability undefined: {0}")]
    DegenerateSeparability(&'static str),

    #[error("synthetic graph came out empty of edges twice despite nonzero edge probabilities")]
    EmptySyntheticGraph,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
