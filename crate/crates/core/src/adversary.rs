//! Malicious-agent strategies and fault-placement validation.
//!
//! A malicious agent broadcasts one value per step — every out-neighbor sees
//! the same number, and apparent disagreement between receivers can only be
//! manufactured through channel delays. Strategies see a full world snapshot
//! (states plus the step's update set), so adaptive attackers fit the same
//! interface, though none of the stock strategies looks at it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryStrategy {
    /// Broadcasts `value` forever.
    Constant { value: i64 },
    /// Broadcasts `even` at even steps and `odd` at odd steps.
    Alternating { even: i64, odd: i64 },
    /// Agent `i` broadcasts `i` at even steps and `i + offset` at odd steps.
    IndexAlternating { offset: i64 },
    /// Broadcasts `values[k]`; running past the end is a configuration error.
    Scripted { values: Vec<i64> },
}

/// Everything an omniscient adversary may inspect when choosing its value
/// for step `time`: all current states and who updates this step.
#[derive(Debug, Clone, Copy)]
pub struct WorldView<'a> {
    pub states: &'a [i64],
    pub update_set: &'a BTreeSet<NodeId>,
    pub time: i64,
}

/// The value `agent` broadcasts for step `k`.
///
/// `k` may be negative: delayed channels read into pre-history, and a
/// malicious sender's pre-history is its pattern extended backward. Periodic
/// strategies extend by parity; scripted ones clamp to their first entry.
pub fn adversary_value(
    strat: &AdversaryStrategy,
    agent: NodeId,
    k: i64,
    _world: &WorldView<'_>,
) -> Result<i64> {
    match strat {
        AdversaryStrategy::Constant { value } => Ok(*value),
        AdversaryStrategy::Alternating { even, odd } => {
            Ok(if k.rem_euclid(2) == 0 { *even } else { *odd })
        }
        AdversaryStrategy::IndexAlternating { offset } => {
            let base = agent as i64;
            Ok(if k.rem_euclid(2) == 0 { base } else { base + offset })
        }
        AdversaryStrategy::Scripted { values } => {
            if values.is_empty() {
                return Err(Error::ScriptExhausted(0));
            }
            if k < 0 {
                return Ok(values[0]);
            }
            values
                .get(k as usize)
                .copied()
                .ok_or(Error::ScriptExhausted(k as usize))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultMode {
    /// At most `f` malicious agents in the whole network.
    Total,
    /// At most `f` malicious agents among any normal agent's in-neighbors.
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub malicious: BTreeSet<NodeId>,
    pub f: usize,
    pub mode: FaultMode,
}

impl Placement {
    pub fn new(malicious: impl IntoIterator<Item = NodeId>, f: usize, mode: FaultMode) -> Self {
        Self { malicious: malicious.into_iter().collect(), f, mode }
    }

    pub fn is_malicious(&self, i: NodeId) -> bool {
        self.malicious.contains(&i)
    }

    /// Normal agents of a graph on `1..=n`.
    pub fn normals(&self, n: usize) -> BTreeSet<NodeId> {
        (1..=n).filter(|i| !self.is_malicious(*i)).collect()
    }
}

/// Whether the placement's cardinality constraint holds on `g`.
pub fn validate_placement(g: &DirectedGraph, p: &Placement) -> bool {
    match p.mode {
        FaultMode::Total => p.malicious.len() <= p.f,
        FaultMode::Local => p.normals(g.n()).iter().all(|&i| {
            g.in_neighbors(i).intersection(&p.malicious).count() <= p.f
        }),
    }
}

#[cfg(test)]
mod tests {
    use crate::networks;

    use super::*;

    fn world<'a>(states: &'a [i64], update_set: &'a BTreeSet<NodeId>) -> WorldView<'a> {
        WorldView { states, update_set, time: 0 }
    }

    #[test]
    fn stock_strategy_values() {
        let empty = BTreeSet::new();
        let w = world(&[], &empty);
        let constant = AdversaryStrategy::Constant { value: 5 };
        for k in [-3, 0, 4, 1_000_000] {
            assert_eq!(adversary_value(&constant, 5, k, &w).unwrap(), 5);
        }

        let alt = AdversaryStrategy::Alternating { even: 1, odd: 10 };
        assert_eq!(adversary_value(&alt, 1, 4, &w).unwrap(), 1);
        assert_eq!(adversary_value(&alt, 1, 7, &w).unwrap(), 10);

        let idx = AdversaryStrategy::IndexAlternating { offset: 6 };
        assert_eq!(adversary_value(&idx, 2, 3, &w).unwrap(), 8);
        assert_eq!(adversary_value(&idx, 2, 4, &w).unwrap(), 2);
        assert_eq!(adversary_value(&idx, 1, 1, &w).unwrap(), 7);
    }

    #[test]
    fn prehistory_extends_backward() {
        let empty = BTreeSet::new();
        let w = world(&[], &empty);
        let alt = AdversaryStrategy::Alternating { even: 1, odd: 10 };
        assert_eq!(adversary_value(&alt, 1, -2, &w).unwrap(), 1);
        assert_eq!(adversary_value(&alt, 1, -1, &w).unwrap(), 10);

        let idx = AdversaryStrategy::IndexAlternating { offset: 6 };
        assert_eq!(adversary_value(&idx, 3, -1, &w).unwrap(), 9);

        let script = AdversaryStrategy::Scripted { values: vec![4, 8] };
        assert_eq!(adversary_value(&script, 1, -7, &w).unwrap(), 4);
    }

    #[test]
    fn scripted_bounds() {
        let empty = BTreeSet::new();
        let w = world(&[], &empty);
        let script = AdversaryStrategy::Scripted { values: vec![4, 8] };
        assert_eq!(adversary_value(&script, 1, 1, &w).unwrap(), 8);
        assert_eq!(adversary_value(&script, 1, 2, &w), Err(Error::ScriptExhausted(2)));
        let hollow = AdversaryStrategy::Scripted { values: vec![] };
        assert_eq!(adversary_value(&hollow, 1, 0, &w), Err(Error::ScriptExhausted(0)));
    }

    #[test]
    fn total_placement_counts_heads() {
        let k6 = networks::complete(6);
        let two = Placement::new([1, 2], 2, FaultMode::Total);
        assert!(validate_placement(&k6, &two));
        let tight = Placement::new([1, 2], 1, FaultMode::Total);
        assert!(!validate_placement(&k6, &tight));
    }

    #[test]
    fn local_placement_counts_per_neighborhood() {
        // Hub 1 feeds every leaf; one malicious hub is 1-local but not
        // 0-local.
        let star = DirectedGraph::from_edges(5, (2..=5).map(|leaf| (1, leaf))).unwrap();
        let hub = Placement::new([1], 1, FaultMode::Local);
        assert!(validate_placement(&star, &hub));
        let strict = Placement::new([1], 0, FaultMode::Local);
        assert!(!validate_placement(&star, &strict));

        // Two malicious agents never share a victim's neighborhood here, so
        // f = 1 local passes where f = 1 total would not.
        let g = DirectedGraph::from_edges(4, [(1, 2), (3, 4)]).unwrap();
        let spread = Placement::new([1, 3], 1, FaultMode::Local);
        assert!(validate_placement(&g, &spread));
        assert!(!validate_placement(&g, &Placement::new([1, 3], 1, FaultMode::Total)));
    }

    #[test]
    fn normals_complement_malicious() {
        let p = Placement::new([1, 4], 2, FaultMode::Total);
        assert_eq!(p.normals(5), [2, 3, 5].into());
        assert!(p.is_malicious(4));
        assert!(!p.is_malicious(2));
    }
}
