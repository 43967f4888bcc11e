//! Resilient quantized consensus over directed networks.
//!
//! Agents hold integer states and repeatedly average with their in-neighbors,
//! trimming suspected extreme values (MSR-style) and rounding through a
//! quantizer. The crate provides the exact (r, s)-robustness checker that
//! characterizes when this succeeds despite malicious agents, the update rule
//! itself, and a simulation engine covering synchronous, asynchronous,
//! randomized, and delayed communication.

#![forbid(unsafe_code)]

pub mod adversary;
pub mod channel;
pub mod engine;
pub mod error;
pub mod graph;
pub mod msr;
pub mod networks;
pub mod quantize;
pub mod schedule;

pub use adversary::{AdversaryStrategy, FaultMode, Placement};
pub use channel::{DelayModel, History};
pub use engine::{monte_carlo, run, RunResult, Scenario, Summary, Trajectory};
pub use error::{Error, Result};
pub use graph::{DirectedGraph, NodeId, RobustnessReport};
pub use msr::NeighborView;
pub use quantize::QuantizerKind;
pub use schedule::Schedule;
