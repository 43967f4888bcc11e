//! Delay models and state-history buffering.
//!
//! Under bounded communication delays an agent reads `x_j[k − τ_ij[k]]`
//! instead of `x_j[k]`. The simulator keeps the last `τ̄ + 1` state vectors
//! in a ring and resolves each edge's delay against it, which is the
//! operational equivalent of the extended-state formulation: the big
//! delay-augmented weight matrices are never materialized.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::msr::NeighborView;

type DelayFn = dyn Fn(NodeId, NodeId, i64) -> usize + Send + Sync;

/// Per-edge communication delays `τ_ij[k]`, bounded by `bound()`.
///
/// The table model keeps one `(even k, odd k)` pair per edge `(j, i)` and
/// applies zero delay to unlisted edges; the scripted model defers to an
/// arbitrary function, checked against the bound at read time.
#[derive(Clone)]
pub enum DelayModel {
    None,
    Constant { tau: usize },
    Table { bound: usize, entries: BTreeMap<(NodeId, NodeId), (usize, usize)> },
    Scripted { bound: usize, func: Arc<DelayFn> },
}

impl DelayModel {
    pub fn constant(tau: usize) -> Self {
        Self::Constant { tau }
    }

    /// Builds a per-edge, per-parity table; every listed delay must respect
    /// `bound`.
    pub fn table(
        bound: usize,
        entries: impl IntoIterator<Item = ((NodeId, NodeId), (usize, usize))>,
    ) -> Result<Self> {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        for (&(j, i), &(even, odd)) in &entries {
            let tau = even.max(odd);
            if tau > bound {
                return Err(Error::DelayBound { j, i, tau, bound });
            }
        }
        Ok(Self::Table { bound, entries })
    }

    pub fn scripted(
        bound: usize,
        func: impl Fn(NodeId, NodeId, i64) -> usize + Send + Sync + 'static,
    ) -> Self {
        Self::Scripted { bound, func: Arc::new(func) }
    }

    /// The bound `τ̄` every delay must respect.
    pub fn bound(&self) -> usize {
        match self {
            Self::None => 0,
            Self::Constant { tau } => *tau,
            Self::Table { bound, .. } | Self::Scripted { bound, .. } => *bound,
        }
    }

    /// Delay on edge `(j, i)` at step `k` (unvalidated for scripted models;
    /// [`delayed_view`] enforces the bound).
    pub fn delay(&self, j: NodeId, i: NodeId, k: i64) -> usize {
        match self {
            Self::None => 0,
            Self::Constant { tau } => *tau,
            Self::Table { entries, .. } => match entries.get(&(j, i)) {
                Some(&(even, odd)) => {
                    if k.rem_euclid(2) == 0 {
                        even
                    } else {
                        odd
                    }
                }
                None => 0,
            },
            Self::Scripted { func, .. } => func(j, i, k),
        }
    }
}

impl fmt::Debug for DelayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => write!(f, "None"),
            Self::Constant { tau } => write!(f, "Constant {{ tau: {tau} }}"),
            Self::Table { bound, entries } => {
                write!(f, "Table {{ bound: {bound}, entries: {entries:?} }}")
            }
            Self::Scripted { bound, .. } => write!(f, "Scripted {{ bound: {bound}, .. }}"),
        }
    }
}

impl PartialEq for DelayModel {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::None, Self::None) => true,
            (Self::Constant { tau: a }, Self::Constant { tau: b }) => a == b,
            (
                Self::Table { bound: ab, entries: ae },
                Self::Table { bound: bb, entries: be },
            ) => ab == bb && ae == be,
            (
                Self::Scripted { bound: ab, func: af },
                Self::Scripted { bound: bb, func: bf },
            ) => ab == bb && Arc::ptr_eq(af, bf),
            _ => false,
        }
    }
}

/// Ring buffer of the last `bound + 1` state vectors.
///
/// `time()` is the step of the newest vector; queries are valid on the
/// closed window `[time − bound, time]`. The window is fully populated from
/// the start, so delayed reads never fall off the young end.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    bound: usize,
    time: i64,
    n: usize,
    ring: VecDeque<Vec<i64>>,
}

impl History {
    /// Seeds the window with copies of `x0`: every time in `[-bound, 0]`
    /// returns the initial state vector.
    pub fn new(bound: usize, x0: &[i64]) -> Self {
        let ring = (0..=bound).map(|_| x0.to_vec()).collect();
        Self { bound, time: 0, n: x0.len(), ring }
    }

    /// Seeds the window with explicit vectors for times `-bound..=0`, oldest
    /// first, letting the caller shape the pre-history (e.g. extend a
    /// malicious broadcast pattern backward in time).
    pub fn with_prehistory(bound: usize, vectors: Vec<Vec<i64>>) -> Result<Self> {
        if vectors.len() != bound + 1 {
            return Err(Error::StateLength { expected: bound + 1, got: vectors.len() });
        }
        let n = vectors[0].len();
        for v in &vectors {
            if v.len() != n {
                return Err(Error::StateLength { expected: n, got: v.len() });
            }
        }
        Ok(Self { bound, time: 0, n, ring: vectors.into() })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Step of the newest recorded vector.
    pub fn time(&self) -> i64 {
        self.time
    }

    /// Appends the vector for step `time() + 1`, evicting the oldest.
    pub fn record(&mut self, x: Vec<i64>) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::StateLength { expected: self.n, got: x.len() });
        }
        self.ring.pop_front();
        self.ring.push_back(x);
        self.time += 1;
        Ok(())
    }

    /// Full state vector at step `t`.
    pub fn get(&self, t: i64) -> Result<&[i64]> {
        let low = self.time - self.bound as i64;
        if t < low || t > self.time {
            return Err(Error::TimeWindow { t, low, high: self.time });
        }
        Ok(&self.ring[(t - low) as usize])
    }

    /// Single agent's state at step `t`.
    pub fn value(&self, agent: NodeId, t: i64) -> Result<i64> {
        assert!(agent >= 1 && agent <= self.n, "agent {agent} outside 1..={}", self.n);
        Ok(self.get(t)?[agent - 1])
    }
}

/// Values agent `i` observes from its in-neighbors at step `k`: each
/// neighbor `j` contributes `x_j[k − τ_ij[k]]`, read from the history.
/// Entries come back in ascending neighbor order.
pub fn delayed_view(
    h: &History,
    g: &DirectedGraph,
    dm: &DelayModel,
    i: NodeId,
    k: i64,
) -> Result<NeighborView> {
    let bound = dm.bound();
    let mut view = Vec::new();
    for j in g.in_neighbors(i) {
        let tau = dm.delay(j, i, k);
        if tau > bound {
            return Err(Error::DelayBound { j, i, tau, bound });
        }
        view.push((j, h.value(j, k - tau as i64)?));
    }
    Ok(view)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting_history(bound: usize, n: usize, records: usize) -> History {
        // x_j[t] = 100·j + t makes every read self-describing.
        let vec_at = |t: i64| (1..=n).map(|j| 100 * j as i64 + t).collect::<Vec<_>>();
        let mut h = History::with_prehistory(
            bound,
            (-(bound as i64)..=0).map(vec_at).collect(),
        )
        .unwrap();
        for t in 1..=records as i64 {
            h.record(vec_at(t)).unwrap();
        }
        h
    }

    #[test]
    fn window_holds_last_bound_plus_one() {
        let h = counting_history(2, 3, 5);
        assert_eq!(h.time(), 5);
        for t in 3..=5 {
            assert_eq!(h.value(1, t).unwrap(), 100 + t);
        }
        assert!(matches!(h.get(2), Err(Error::TimeWindow { t: 2, low: 3, high: 5 })));
        assert!(matches!(h.get(6), Err(Error::TimeWindow { .. })));
    }

    #[test]
    fn zero_bound_keeps_only_current() {
        let h = counting_history(0, 2, 4);
        assert_eq!(h.get(4).unwrap(), &[104, 204]);
        assert!(h.get(3).is_err());
    }

    #[test]
    fn clamped_prehistory_returns_initial_states() {
        let h = History::new(2, &[7, 8]);
        for t in [-2, -1, 0] {
            assert_eq!(h.get(t).unwrap(), &[7, 8]);
        }
        assert!(h.get(-3).is_err());
    }

    #[test]
    fn construction_and_record_validate_lengths() {
        assert!(matches!(
            History::with_prehistory(1, vec![vec![1, 2]]),
            Err(Error::StateLength { expected: 2, got: 1 })
        ));
        assert!(matches!(
            History::with_prehistory(1, vec![vec![1, 2], vec![1]]),
            Err(Error::StateLength { .. })
        ));
        let mut h = History::new(0, &[1, 2]);
        assert!(matches!(h.record(vec![1]), Err(Error::StateLength { .. })));
    }

    fn two_node_graph() -> DirectedGraph {
        DirectedGraph::from_edges(2, [(1, 2)]).unwrap()
    }

    #[test]
    fn no_delay_reads_current_states() {
        let h = counting_history(0, 2, 3);
        let view = delayed_view(&h, &two_node_graph(), &DelayModel::None, 2, 3).unwrap();
        assert_eq!(view, vec![(1, 103)]);
    }

    #[test]
    fn constant_delay_clamps_into_prehistory() {
        let h = History::new(1, &[5, 6]);
        let view =
            delayed_view(&h, &two_node_graph(), &DelayModel::constant(1), 2, 0).unwrap();
        assert_eq!(view, vec![(1, 5)]);
    }

    #[test]
    fn table_swaps_parity_per_step() {
        // Delay pattern on the attacker's out-edges: (7,8) toward agent 2,
        // (8,7) toward agents 3, 5, 7.
        let g = DirectedGraph::from_edges(7, [(1, 2), (1, 3), (1, 5), (1, 7)]).unwrap();
        let dm = DelayModel::table(
            8,
            [((1, 2), (7, 8)), ((1, 3), (8, 7)), ((1, 5), (8, 7)), ((1, 7), (8, 7))],
        )
        .unwrap();
        for k in [10i64, 11, 12, 13] {
            let h = counting_history(8, 7, k as usize);
            let expect_2 = if k % 2 == 0 { k - 7 } else { k - 8 };
            let expect_rest = if k % 2 == 0 { k - 8 } else { k - 7 };
            assert_eq!(
                delayed_view(&h, &g, &dm, 2, k).unwrap(),
                vec![(1, 100 + expect_2)]
            );
            for i in [3, 5, 7] {
                assert_eq!(
                    delayed_view(&h, &g, &dm, i, k).unwrap(),
                    vec![(1, 100 + expect_rest)]
                );
            }
        }
    }

    #[test]
    fn unlisted_edges_have_zero_delay() {
        let g = DirectedGraph::from_edges(3, [(1, 3), (2, 3)]).unwrap();
        let dm = DelayModel::table(4, [((1, 3), (2, 2))]).unwrap();
        let h = counting_history(4, 3, 10);
        assert_eq!(delayed_view(&h, &g, &dm, 3, 10).unwrap(), vec![(1, 108), (2, 210)]);
    }

    #[test]
    fn table_rejects_delay_above_bound() {
        assert!(matches!(
            DelayModel::table(3, [((1, 2), (2, 4))]),
            Err(Error::DelayBound { j: 1, i: 2, tau: 4, bound: 3 })
        ));
    }

    #[test]
    fn scripted_overrun_is_caught_at_read_time() {
        let dm = DelayModel::scripted(1, |_, _, k| if k < 5 { 1 } else { k as usize });
        let h = counting_history(1, 2, 4);
        assert_eq!(delayed_view(&h, &two_node_graph(), &dm, 2, 4).unwrap(), vec![(1, 103)]);
        let h = counting_history(1, 2, 5);
        assert!(matches!(
            delayed_view(&h, &two_node_graph(), &dm, 2, 5),
            Err(Error::DelayBound { tau: 5, bound: 1, .. })
        ));
    }

    #[test]
    fn view_is_sorted_by_neighbor_id() {
        let g = DirectedGraph::from_edges(4, [(3, 1), (2, 1), (4, 1)]).unwrap();
        let h = counting_history(0, 4, 1);
        let ids: Vec<NodeId> = delayed_view(&h, &g, &DelayModel::None, 1, 1)
            .unwrap()
            .into_iter()
            .map(|(j, _)| j)
            .collect();
        assert_eq!(ids, vec![2, 3, 4]);
    }
}
