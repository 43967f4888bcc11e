//! Crate-wide error type.

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("node {node} outside 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("weight lower bound alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("edge ({0}, {1}) not in graph")]
    MissingEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) already in graph")]
    DuplicateEdge(NodeId, NodeId),
    #[error("robustness query (r={r}, s={s}) invalid for n={n}: need r < n and 1 <= s < n")]
    RobustnessParams { r: usize, s: usize, n: usize },
    #[error("robustness enumeration supports at most {max} nodes, graph has {n}")]
    GraphTooLarge { n: usize, max: usize },
    #[error("{0}")]
    Parse(String),
    #[error("quantizer input is not finite")]
    NonFinite,
    #[error("quantizer input {0} outside representable integer range")]
    OutOfRange(f64),
    #[error("duplicate neighbor id {0} in view")]
    DuplicateNeighbor(NodeId),
    #[error("state vector has length {got}, expected {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("time {t} outside history window [{low}, {high}]")]
    TimeWindow { t: i64, low: i64, high: i64 },
    #[error("delay {tau} on edge ({j}, {i}) exceeds bound {bound}")]
    DelayBound { j: NodeId, i: NodeId, tau: usize, bound: usize },
    #[error("schedule selects non-normal agent {0}")]
    ScheduleAgent(NodeId),
    #[error("update probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("scripted strategy has no value for step {0}")]
    ScriptExhausted(usize),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
}
