//! The simulation loop, safety/agreement verdicts, and Monte Carlo harness.
//!
//! One step: draw the update set, fix the malicious broadcasts, let every
//! scheduled normal agent filter-and-average its (possibly delayed) view,
//! and commit everything simultaneously. The engine asserts the structural
//! invariants of the update rule as it goes — windowed state envelopes must
//! never widen, and consensus, once the whole delay window sits on it, must
//! never break — so a run that completes is itself evidence.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adversary::{adversary_value, AdversaryStrategy, Placement, WorldView};
use crate::channel::{delayed_view, DelayModel, History};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::msr::normal_update;
use crate::quantize::QuantizerKind;
use crate::schedule::{update_set, validate_coverage, Schedule, UpdateProb};

/// A full experiment description; `run` is a pure function of this.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: DirectedGraph,
    pub placement: Placement,
    pub strategy: AdversaryStrategy,
    pub schedule: Schedule,
    pub delay: DelayModel,
    pub quantizer: QuantizerKind,
    pub x0: Vec<i64>,
    /// Maximum number of steps; `None` applies the default margin.
    pub horizon: Option<usize>,
    pub seed: u64,
}

impl Scenario {
    /// Steps to simulate: the explicit horizon, or `10·n·(τ̄+1)·k̄`.
    pub fn effective_horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| {
            10 * self.graph.n() * (self.delay.bound() + 1) * self.schedule.coverage_bound()
        })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn normals(&self) -> BTreeSet<NodeId> {
        self.placement.normals(self.graph.n())
    }

    /// Checks every cross-field invariant, naming the offending piece.
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        if self.x0.len() != n {
            return Err(Error::StateLength { expected: n, got: self.x0.len() });
        }
        for &j in &self.placement.malicious {
            if j < 1 || j > n {
                return Err(Error::Config(format!("malicious agent {j} outside 1..={n}")));
            }
        }
        let normals = self.normals();
        if normals.is_empty() {
            return Err(Error::Config("scenario needs at least one normal agent".into()));
        }
        if !crate::adversary::validate_placement(&self.graph, &self.placement) {
            let mode = match self.placement.mode {
                crate::adversary::FaultMode::Total => "total",
                crate::adversary::FaultMode::Local => "local",
            };
            return Err(Error::Config(format!(
                "malicious set violates f-{mode} bound (f = {})",
                self.placement.f
            )));
        }
        match &self.schedule {
            Schedule::Deterministic { table, coverage_bound } => {
                for entry in table {
                    if let Some(&bad) = entry.iter().find(|id| !normals.contains(id)) {
                        return Err(Error::ScheduleAgent(bad));
                    }
                }
                if !validate_coverage(&self.schedule, *coverage_bound, &normals) {
                    return Err(Error::Config(format!(
                        "deterministic schedule fails coverage within {coverage_bound} steps"
                    )));
                }
            }
            Schedule::Probabilistic { p: UpdateProb::PerAgent(map) } => {
                if let Some(&missing) = normals.iter().find(|id| !map.contains_key(id)) {
                    return Err(Error::Config(format!(
                        "no update probability for normal agent {missing}"
                    )));
                }
            }
            _ => {}
        }
        if let DelayModel::Table { entries, .. } = &self.delay {
            for &(j, i) in entries.keys() {
                if !self.graph.has_edge(j, i) {
                    return Err(Error::Config(format!(
                        "delay entry on missing edge ({j}, {i})"
                    )));
                }
            }
        }
        if let AdversaryStrategy::Scripted { values } = &self.strategy {
            if !self.placement.malicious.is_empty() {
                let needed = self.effective_horizon() + 1;
                if values.len() < needed {
                    return Err(Error::Config(format!(
                        "scripted strategy has {} values, horizon needs {needed}",
                        values.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Everything recorded about one step: the committed states, who was
/// scheduled, and what every malicious agent broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub k: usize,
    pub states: Vec<i64>,
    pub update_set: BTreeSet<NodeId>,
    pub broadcasts: BTreeMap<NodeId, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn final_states(&self) -> &[i64] {
        &self.steps.last().expect("trajectory is never empty").states
    }

    pub fn state(&self, k: usize, agent: NodeId) -> i64 {
        self.steps[k].states[agent - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunResult {
    pub safety_ok: bool,
    pub agreed: bool,
    /// First step from which all normal states stayed equal to the end.
    pub k_a: Option<usize>,
    pub final_value: Option<i64>,
    /// Closed interval spanned by the normal initial states.
    pub safety_interval: (i64, i64),
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

fn broadcasts(
    s: &Scenario,
    k: i64,
    states: &[i64],
    u_k: &BTreeSet<NodeId>,
) -> Result<BTreeMap<NodeId, i64>> {
    let world = WorldView { states, update_set: u_k, time: k };
    s.placement
        .malicious
        .iter()
        .map(|&j| Ok((j, adversary_value(&s.strategy, j, k, &world)?)))
        .collect()
}

fn normal_span(states: &[i64], normals: &BTreeSet<NodeId>) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for &i in normals {
        lo = lo.min(states[i - 1]);
        hi = hi.max(states[i - 1]);
    }
    (lo, hi)
}

fn window_span(h: &History, normals: &BTreeSet<NodeId>) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for t in (h.time() - h.bound() as i64)..=h.time() {
        let (l, h) = normal_span(h.get(t).expect("window time"), normals);
        lo = lo.min(l);
        hi = hi.max(h);
    }
    (lo, hi)
}

/// Executes a validated scenario.
///
/// Stops at the horizon, or earlier once the normal agents have held a
/// common value for `τ̄ + 1` steps beyond first agreement — delayed echoes
/// of pre-agreement values can lawfully break an instant of agreement, but
/// never one the whole delay window has settled on, and the engine aborts
/// with a contract error if that or the envelope monotonicity ever fails.
pub fn run(s: &Scenario) -> Result<(Trajectory, RunResult)> {
    s.validate()?;
    let normals = s.normals();
    let f = s.placement.f;
    let bound = s.delay.bound();
    let horizon = s.effective_horizon();

    let mut sched_rng = stream(s.seed, 0);
    let mut agent_rngs: BTreeMap<NodeId, ChaCha8Rng> =
        normals.iter().map(|&i| (i, stream(s.seed, i as u64))).collect();

    // Pre-history: normal entries clamp to x0; malicious entries extend the
    // broadcast pattern backward so delayed reads see the strategy, not a
    // fictitious initial value.
    let empty = BTreeSet::new();
    let mut seed_vectors = Vec::with_capacity(bound + 1);
    for t in -(bound as i64)..=-1 {
        let mut v = s.x0.clone();
        let world = WorldView { states: &s.x0, update_set: &empty, time: t };
        for &j in &s.placement.malicious {
            v[j - 1] = adversary_value(&s.strategy, j, t, &world)?;
        }
        seed_vectors.push(v);
    }

    let mut states = s.x0.clone();
    let mut u_k = update_set(&s.schedule, &normals, 0, &mut sched_rng)?;
    let b0 = broadcasts(s, 0, &states, &u_k)?;
    for (&j, &v) in &b0 {
        states[j - 1] = v;
    }
    seed_vectors.push(states.clone());
    let mut history = History::with_prehistory(bound, seed_vectors)?;
    let mut steps = vec![StepRecord {
        k: 0,
        states: states.clone(),
        update_set: u_k.clone(),
        broadcasts: b0,
    }];

    let safety_interval = normal_span(&states, &normals);
    let mut safety_ok = true;
    let (mut env_lo, mut env_hi) = window_span(&history, &normals);
    let mut run_start = all_equal(&states, &normals).then_some(0);

    for k in 0..horizon {
        if let Some(start) = run_start {
            if steps.len() - start >= bound + 2 {
                break;
            }
        }

        let mut next = states.clone();
        for &i in &normals {
            if u_k.contains(&i) {
                let view = delayed_view(&history, &s.graph, &s.delay, i, k as i64)?;
                let rng = agent_rngs.get_mut(&i).expect("rng per normal");
                next[i - 1] = normal_update(states[i - 1], &view, f, s.quantizer, rng)?;
            }
        }
        states = next;

        let kk = (k + 1) as i64;
        let u_next = update_set(&s.schedule, &normals, kk, &mut sched_rng)?;
        let b_next = broadcasts(s, kk, &states, &u_next)?;
        for (&j, &v) in &b_next {
            states[j - 1] = v;
        }
        history.record(states.clone())?;
        steps.push(StepRecord {
            k: k + 1,
            states: states.clone(),
            update_set: u_next.clone(),
            broadcasts: b_next,
        });
        u_k = u_next;

        let (lo, hi) = normal_span(&states, &normals);
        safety_ok &= safety_interval.0 <= lo && hi <= safety_interval.1;

        let (new_lo, new_hi) = window_span(&history, &normals);
        if new_hi > env_hi || new_lo < env_lo {
            return Err(Error::Contract(format!(
                "state envelope widened at step {}: [{env_lo}, {env_hi}] -> [{new_lo}, {new_hi}]",
                k + 1
            )));
        }
        (env_lo, env_hi) = (new_lo, new_hi);

        if lo == hi {
            run_start.get_or_insert(k + 1);
        } else if let Some(start) = run_start.take() {
            if (k + 1) - start > bound {
                return Err(Error::Contract(format!(
                    "normal states diverged at step {} after window-stable agreement at {start}",
                    k + 1
                )));
            }
        }
    }

    let agreed = all_equal(&states, &normals);
    let first_normal = *normals.first().expect("nonempty normals");
    Ok((
        Trajectory { steps },
        RunResult {
            safety_ok,
            agreed,
            k_a: if agreed { run_start } else { None },
            final_value: agreed.then(|| states[first_normal - 1]),
            safety_interval,
        },
    ))
}

fn all_equal(states: &[i64], normals: &BTreeSet<NodeId>) -> bool {
    let (lo, hi) = normal_span(states, normals);
    lo == hi
}

/// True iff every normal state at every recorded step lies in the interval
/// spanned by the normal initial states (the pre-history clamp makes the
/// delayed interval coincide with the undelayed one, so `tau_bar` only
/// matters as documentation of what the trajectory claims).
pub fn check_safety(t: &Trajectory, normals: &BTreeSet<NodeId>, _tau_bar: usize) -> bool {
    let (lo, hi) = normal_span(&t.steps[0].states, normals);
    t.steps.iter().all(|step| {
        let (l, h) = normal_span(&step.states, normals);
        lo <= l && h <= hi
    })
}

/// Aggregate verdicts over a batch of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub agreements: usize,
    pub safety_violations: usize,
    /// Min, median, max of `k_a` over the agreeing runs.
    pub k_a: Option<(usize, usize, usize)>,
    /// Final consensus value -> number of runs ending there.
    pub final_values: BTreeMap<i64, usize>,
}

impl Summary {
    pub fn agreement_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.agreements as f64 / self.runs as f64
        }
    }
}

/// Runs the scenario under seeds `seed, seed+1, …, seed+n_runs-1` in
/// parallel and folds the results in seed order, so the summary is
/// independent of worker interleaving.
pub fn monte_carlo(s: &Scenario, n_runs: usize) -> Result<Summary> {
    let results: Vec<Result<RunResult>> = (0..n_runs)
        .into_par_iter()
        .map(|r| run(&s.with_seed(s.seed.wrapping_add(r as u64))).map(|(_, rr)| rr))
        .collect();

    let mut agreements = 0;
    let mut safety_violations = 0;
    let mut kas = Vec::new();
    let mut final_values = BTreeMap::new();
    for result in results {
        let rr = result?;
        safety_violations += usize::from(!rr.safety_ok);
        if rr.agreed {
            agreements += 1;
            kas.push(rr.k_a.expect("agreed runs carry k_a"));
            *final_values.entry(rr.final_value.expect("agreed runs carry a value")).or_insert(0) +=
                1;
        }
    }
    kas.sort_unstable();
    Ok(Summary {
        runs: n_runs,
        agreements,
        safety_violations,
        k_a: (!kas.is_empty()).then(|| (kas[0], kas[kas.len() / 2], kas[kas.len() - 1])),
        final_values,
    })
}

/// Renders the `k,agent,state,updated,malicious` table, one row per
/// (step, agent), rows ordered by step then agent.
pub fn trajectory_csv(t: &Trajectory, malicious: &BTreeSet<NodeId>) -> String {
    let mut out = String::from("k,agent,state,updated,malicious\n");
    for step in &t.steps {
        for (ix, &state) in step.states.iter().enumerate() {
            let agent = ix + 1;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                step.k,
                agent,
                state,
                step.update_set.contains(&agent),
                malicious.contains(&agent),
            ));
        }
    }
    out
}
