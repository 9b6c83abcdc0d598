use thiserror::Error;

use crate::engine::RoundLog;
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} already exists")]
    NodeExists(NodeId),
    #[error("node {0} is muted")]
    MutedNode(NodeId),
    #[error("node {0} is already visible")]
    AlreadyVisible(NodeId),
    #[error("edge {0}-{1} already exists")]
    EdgeExists(NodeId, NodeId),
    #[error("edge {0}-{1} does not exist")]
    MissingEdge(NodeId, NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("node {node} lists neighbor {neighbor} twice")]
    DuplicateNeighbor { node: NodeId, neighbor: NodeId },
    #[error("node {0} has no priority")]
    MissingPriority(NodeId),
    #[error("node id {0} was used earlier in this run")]
    ReusedId(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("assignment has no state for node {0}")]
    MissingState(NodeId),
    #[error("pre-change states violate the MIS invariant at node {0}")]
    Precondition(NodeId),
    #[error("{nodes} nodes is too many for exhaustive search (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("OUT node {0} has no IN neighbor")]
    Uncovered(NodeId),
    #[error("assignment has no state for node {0}")]
    MissingState(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no stability after {limit} rounds")]
    RoundLimit { limit: u32 },
    #[error("no quiescence after {limit} deliveries")]
    EventLimit { limit: u64 },
    #[error("MIS invariant violated at node {node} after a {change} change")]
    InvariantViolation {
        node: NodeId,
        change: String,
        /// Round logs of the offending run, when logging was on.
        logs: Vec<RoundLog>,
    },
    #[error("node {0} stopped outside M/NOT_M")]
    Unstable(NodeId),
    #[error("the asynchronous engine only runs the template protocol")]
    AsyncFourState,
}
