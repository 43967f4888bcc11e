//! MSR filtering and the normal agent's quantized update.
//!
//! Each normal agent discards up to `f` observed values strictly above its
//! own state and up to `f` strictly below, then moves to the quantized
//! uniform average of whatever survives. The filter looks only at values,
//! never identities: a malicious neighbor is neutralized exactly when its
//! report is trimmed as an extreme or sandwiched between normal values.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::quantize::{quantize_ratio, QuantizerKind};

/// Observed (possibly delayed) neighbor values available to one agent.
pub type NeighborView = Vec<(NodeId, i64)>;

/// Uniform weights over self plus the retained neighbors, kept in exact
/// rational form: every participant receives `1 / parts()`, so the weights
/// sum to one by construction and each is at least `1/(d_max + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightAssignment {
    parts: usize,
}

impl WeightAssignment {
    pub fn uniform(retained_count: usize) -> Self {
        Self { parts: retained_count + 1 }
    }

    /// Total number of equal shares (retained neighbors plus self).
    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn self_weight(&self) -> f64 {
        1.0 / self.parts as f64
    }

    pub fn neighbor_weight(&self) -> f64 {
        1.0 / self.parts as f64
    }
}

/// Trims suspected extremes from `view` relative to `own`.
///
/// Removes the `f` largest values strictly above `own` (all of them if fewer
/// than `f` exist) and symmetrically the `f` smallest strictly below. Ties
/// among equal extreme values fall to the higher neighbor id first. Retained
/// entries keep their input order.
pub fn msr_filter(own: i64, view: &[(NodeId, i64)], f: usize) -> Result<NeighborView> {
    let mut seen = BTreeSet::new();
    for &(id, _) in view {
        if !seen.insert(id) {
            return Err(Error::DuplicateNeighbor(id));
        }
    }
    let mut above: Vec<usize> = (0..view.len()).filter(|&ix| view[ix].1 > own).collect();
    let mut below: Vec<usize> = (0..view.len()).filter(|&ix| view[ix].1 < own).collect();
    above.sort_by_key(|&ix| (Reverse(view[ix].1), Reverse(view[ix].0)));
    below.sort_by_key(|&ix| (view[ix].1, Reverse(view[ix].0)));
    let dropped: BTreeSet<usize> =
        above.into_iter().take(f).chain(below.into_iter().take(f)).collect();
    Ok(view
        .iter()
        .enumerate()
        .filter(|(ix, _)| !dropped.contains(ix))
        .map(|(_, &entry)| entry)
        .collect())
}

/// One step of a normal agent: filter, average uniformly, quantize.
///
/// The average is evaluated as an exact integer ratio, so the only
/// randomness is the quantizer's single draw (none when the average is
/// already an integer). The result always lies between the smallest and
/// largest of `own` and the retained values.
pub fn normal_update<R: Rng + ?Sized>(
    own: i64,
    view: &[(NodeId, i64)],
    f: usize,
    kind: QuantizerKind,
    rng: &mut R,
) -> Result<i64> {
    let retained = msr_filter(own, view, f)?;
    let weights = WeightAssignment::uniform(retained.len());
    let num: i128 =
        i128::from(own) + retained.iter().map(|&(_, v)| i128::from(v)).sum::<i128>();
    quantize_ratio(kind, num, weights.parts() as i128, rng)
}
