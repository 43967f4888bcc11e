//! Stock topologies used by the bundled scenarios, tests, and benches.
//!
//! The three seven-node networks form a ladder. [`seven_node`] sits exactly
//! at the (2,2)-robustness threshold needed to tolerate a single malicious
//! agent. Pruning five edges yields [`seven_node_sparse`], which stays
//! strongly connected yet drops to 1-robust, so one well-placed attacker can
//! keep it split forever. Adding five edges instead yields
//! [`seven_node_dense`], which is 3-robust and survives the same attack even
//! under randomized updates and bounded delays.

use crate::graph::{DirectedGraph, NodeId};

/// Edge list behind [`seven_node`].
pub const SEVEN_NODE_EDGES: [(NodeId, NodeId); 20] = [
    (1, 2),
    (1, 3),
    (1, 5),
    (1, 7),
    (2, 4),
    (3, 2),
    (3, 5),
    (3, 7),
    (4, 1),
    (4, 2),
    (4, 5),
    (4, 6),
    (5, 1),
    (5, 6),
    (6, 1),
    (6, 3),
    (6, 4),
    (6, 7),
    (7, 4),
    (7, 5),
];

/// Edges removed from [`seven_node`] to form [`seven_node_sparse`].
pub const SEVEN_NODE_PRUNED: [(NodeId, NodeId); 5] =
    [(1, 7), (3, 2), (5, 6), (6, 3), (6, 7)];

/// Edges added to [`seven_node`] to form [`seven_node_dense`].
pub const SEVEN_NODE_AUGMENT: [(NodeId, NodeId); 5] =
    [(3, 6), (4, 3), (5, 4), (6, 5), (7, 6)];

/// Seven-node benchmark network: (2,2)-robust but not 3-robust.
pub fn seven_node() -> DirectedGraph {
    DirectedGraph::from_edges(7, SEVEN_NODE_EDGES).expect("seven_node edges are well-formed")
}

/// Sparse seven-node variant: strongly connected but only 1-robust.
pub fn seven_node_sparse() -> DirectedGraph {
    seven_node()
        .without_edges(&SEVEN_NODE_PRUNED)
        .expect("pruned edges are present in seven_node")
}

/// Dense seven-node variant: 3-robust with minimum in-degree 3.
pub fn seven_node_dense() -> DirectedGraph {
    seven_node()
        .with_edges(&SEVEN_NODE_AUGMENT)
        .expect("augment edges are absent from seven_node")
}

/// Five-node network with a designated malicious slot at node 5.
///
/// Nodes 1–3 all hear node 5, node 4 hears only 1–3, no node hears both 4
/// and 5, and dropping node 5 leaves a directed spanning tree rooted at 1.
/// (2,2)-robust but not 3-robust.
pub fn five_node() -> DirectedGraph {
    let edges = [
        (1, 2),
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 1),
        (2, 3),
        (2, 4),
        (2, 5),
        (3, 4),
        (5, 1),
        (5, 2),
        (5, 3),
    ];
    DirectedGraph::from_edges(5, edges).expect("five_node edges are well-formed")
}

/// Complete graph on `n` nodes: every ordered pair is an edge.
pub fn complete(n: usize) -> DirectedGraph {
    let edges =
        (1..=n).flat_map(|j| (1..=n).filter(move |i| *i != j).map(move |i| (j, i)));
    DirectedGraph::from_edges(n, edges).expect("complete graph is well-formed")
}

/// Directed path `1 -> 2 -> ... -> n`: each node hears only its predecessor,
/// so node 1 never updates and information flows strictly one way.
pub fn line(n: usize) -> DirectedGraph {
    let edges = (1..n).map(|j| (j, j + 1));
    DirectedGraph::from_edges(n, edges).expect("line graph is well-formed")
}
