//! Update-set generators: which normal agents act at step `k`.
//!
//! Three regimes: everyone every step, a periodic table of update sets
//! (valid when every window of `k̄` consecutive steps covers every normal
//! agent), and independent per-agent coin flips. Malicious agents never
//! appear here — they act every step through their strategy.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Per-agent update probabilities for the randomized regime.
#[derive(Debug, Clone, PartialEq)]
pub enum UpdateProb {
    /// One probability shared by every normal agent.
    Uniform(f64),
    /// Individual probabilities; every normal agent must be listed.
    PerAgent(std::collections::BTreeMap<NodeId, f64>),
}

impl UpdateProb {
    fn get(&self, i: NodeId) -> Result<f64> {
        match self {
            Self::Uniform(p) => Ok(*p),
            Self::PerAgent(map) => {
                map.get(&i).copied().ok_or_else(|| {
                    Error::Config(format!("no update probability for agent {i}"))
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Synchronous,
    Deterministic { table: Vec<BTreeSet<NodeId>>, coverage_bound: usize },
    Probabilistic { p: UpdateProb },
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

impl Schedule {
    /// Periodic table applied as `table[k mod period]`, promising coverage
    /// of all normals within any `coverage_bound` consecutive steps (use
    /// [`validate_coverage`] to check the promise against a normal set).
    pub fn deterministic(
        table: Vec<BTreeSet<NodeId>>,
        coverage_bound: usize,
    ) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Config("deterministic schedule table is empty".into()));
        }
        if coverage_bound == 0 {
            return Err(Error::Config("coverage bound must be at least 1".into()));
        }
        Ok(Self::Deterministic { table, coverage_bound })
    }

    pub fn probabilistic(p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self::Probabilistic { p: UpdateProb::Uniform(p) })
    }

    pub fn probabilistic_per_agent(
        probabilities: std::collections::BTreeMap<NodeId, f64>,
    ) -> Result<Self> {
        for &p in probabilities.values() {
            check_probability(p)?;
        }
        Ok(Self::Probabilistic { p: UpdateProb::PerAgent(probabilities) })
    }

    /// Window length within which every normal agent is promised to update:
    /// the table's bound for deterministic schedules, 1 otherwise.
    pub fn coverage_bound(&self) -> usize {
        match self {
            Self::Deterministic { coverage_bound, .. } => *coverage_bound,
            Self::Synchronous | Self::Probabilistic { .. } => 1,
        }
    }
}

/// The update set `U[k]`.
///
/// Probabilistic schedules consume exactly one uniform draw per normal
/// agent, in ascending id order, whether or not the agent is selected —
/// keeping the stream advance independent of outcomes.
pub fn update_set<R: Rng + ?Sized>(
    s: &Schedule,
    normals: &BTreeSet<NodeId>,
    k: i64,
    rng: &mut R,
) -> Result<BTreeSet<NodeId>> {
    match s {
        Schedule::Synchronous => Ok(normals.clone()),
        Schedule::Deterministic { table, .. } => {
            let entry = &table[k.rem_euclid(table.len() as i64) as usize];
            if let Some(&bad) = entry.iter().find(|id| !normals.contains(id)) {
                return Err(Error::ScheduleAgent(bad));
            }
            Ok(entry.clone())
        }
        Schedule::Probabilistic { p } => {
            let mut set = BTreeSet::new();
            for &i in normals {
                let pi = p.get(i)?;
                check_probability(pi)?;
                let u: f64 = rng.random();
                if u < pi {
                    set.insert(i);
                }
            }
            Ok(set)
        }
    }
}

/// Whether every window of `k_bar` consecutive steps updates every normal
/// agent. Synchronous schedules satisfy any `k_bar >= 1`; probabilistic
/// schedules make no window promise and are vacuously accepted.
pub fn validate_coverage(s: &Schedule, k_bar: usize, normals: &BTreeSet<NodeId>) -> bool {
    match s {
        Schedule::Synchronous => k_bar >= 1,
        Schedule::Probabilistic { .. } => true,
        Schedule::Deterministic { table, .. } => {
            if table.is_empty() || k_bar == 0 {
                return normals.is_empty();
            }
            (0..table.len()).all(|start| {
                let mut covered = BTreeSet::new();
                for offset in 0..k_bar {
                    covered.extend(&table[(start + offset) % table.len()]);
                }
                normals.is_subset(&covered)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn set(ids: &[NodeId]) -> BTreeSet<NodeId> {
        ids.iter().copied().collect()
    }

    fn parity_table() -> Schedule {
        Schedule::deterministic(vec![set(&[3, 5, 7]), set(&[2, 4, 6])], 2).unwrap()
    }

    #[test]
    fn synchronous_returns_all_normals() {
        let normals = set(&[2, 3, 4]);
        for k in 0..5 {
            assert_eq!(
                update_set(&Schedule::Synchronous, &normals, k, &mut rng(0)).unwrap(),
                normals
            );
        }
        assert!(validate_coverage(&Schedule::Synchronous, 1, &normals));
    }

    #[test]
    fn parity_table_alternates() {
        let normals = set(&[2, 3, 4, 5, 6, 7]);
        let s = parity_table();
        for k in 0..6 {
            let expect = if k % 2 == 0 { set(&[3, 5, 7]) } else { set(&[2, 4, 6]) };
            assert_eq!(update_set(&s, &normals, k, &mut rng(0)).unwrap(), expect);
        }
    }

    #[test]
    fn coverage_window_checks() {
        let normals = set(&[2, 3, 4, 5, 6, 7]);
        let s = parity_table();
        assert!(validate_coverage(&s, 2, &normals));
        assert!(!validate_coverage(&s, 1, &normals));
        assert!(validate_coverage(&s, 3, &normals));
        assert!(Schedule::deterministic(vec![], 2).is_err());
    }

    #[test]
    fn table_with_non_normal_agent_is_rejected() {
        let normals = set(&[2, 3]);
        let s = Schedule::deterministic(vec![set(&[1, 2])], 1).unwrap();
        assert_eq!(update_set(&s, &normals, 0, &mut rng(0)), Err(Error::ScheduleAgent(1)));
    }

    #[test]
    fn probability_bounds_enforced() {
        assert!(matches!(Schedule::probabilistic(0.0), Err(Error::InvalidProbability(_))));
        assert!(matches!(Schedule::probabilistic(1.5), Err(Error::InvalidProbability(_))));
        assert!(matches!(Schedule::probabilistic(f64::NAN), Err(Error::InvalidProbability(_))));
        assert!(Schedule::probabilistic(1.0).is_ok());
        let map = [(2, 0.5), (3, 0.0)].into_iter().collect();
        assert!(Schedule::probabilistic_per_agent(map).is_err());
    }

    #[test]
    fn probability_one_selects_everyone() {
        let normals = set(&[2, 3, 4]);
        let s = Schedule::probabilistic(1.0).unwrap();
        for k in 0..20 {
            assert_eq!(update_set(&s, &normals, k, &mut rng(1)).unwrap(), normals);
        }
    }

    #[test]
    fn one_draw_per_normal_in_id_order() {
        let normals = set(&[2, 5, 9]);
        let s = Schedule::probabilistic(0.5).unwrap();
        let mut a = rng(2);
        update_set(&s, &normals, 0, &mut a).unwrap();
        let mut b = rng(2);
        for _ in 0..normals.len() {
            let _: f64 = b.random();
        }
        assert_eq!(a, b);

        // Id order: agent i's coin is the i-th draw, so a set containing
        // only later ids reuses later coins.
        let mut c = rng(3);
        let full = update_set(&s, &set(&[1, 2, 3]), 0, &mut c).unwrap();
        let mut d = rng(3);
        let _: f64 = d.random();
        let tail = update_set(&s, &set(&[2, 3]), 0, &mut d).unwrap();
        assert_eq!(full.contains(&2), tail.contains(&2));
        assert_eq!(full.contains(&3), tail.contains(&3));
    }

    #[test]
    fn missing_per_agent_probability_is_reported() {
        let s = Schedule::probabilistic_per_agent([(2, 0.5)].into_iter().collect()).unwrap();
        assert!(matches!(
            update_set(&s, &set(&[2, 3]), 0, &mut rng(4)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empirical_frequency_tracks_p() {
        let normals = set(&[1, 2, 3]);
        let s = Schedule::probabilistic(0.5).unwrap();
        let mut r = rng(5);
        let steps = 10_000;
        let mut per_agent = [0usize; 3];
        let mut simultaneous = 0usize;
        for k in 0..steps {
            let u = update_set(&s, &normals, k, &mut r).unwrap();
            for (slot, id) in per_agent.iter_mut().zip(1..) {
                *slot += usize::from(u.contains(&id));
            }
            simultaneous += usize::from(u.len() == normals.len());
        }
        for count in per_agent {
            let freq = count as f64 / steps as f64;
            assert!((freq - 0.5).abs() < 0.02, "per-agent frequency {freq}");
        }
        // All three coins land heads with probability 1/8.
        let freq = simultaneous as f64 / steps as f64;
        assert!((freq - 0.125).abs() < 0.015, "simultaneous frequency {freq}");
    }
}
