//! Directed graphs and exact (r, s)-robustness checking.
//!
//! Nodes are labeled `1..=n`. An edge `(j, i)` carries information from `j`
//! to `i`, so `i` observes the value of `j`. Robustness is decided by
//! exhaustive enumeration of disjoint subset pairs, which is exact but
//! exponential: the checker refuses graphs above [`MAX_ROBUSTNESS_NODES`]
//! nodes and logs a warning above [`ROBUSTNESS_WARN_NODES`].

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Hard cap on `n` for the subset-pair enumeration (3^n pairs).
pub const MAX_ROBUSTNESS_NODES: usize = 16;
/// Sizes above this are still exact but slow enough to warrant a warning.
pub const ROBUSTNESS_WARN_NODES: usize = 12;

/// Outcome of a single (r, s)-robustness query.
///
/// When the property fails, `witness` holds a pair of nonempty disjoint
/// subsets for which none of the three defining conditions is satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustnessReport {
    pub r: usize,
    pub s: usize,
    pub holds: bool,
    pub witness: Option<(BTreeSet<NodeId>, BTreeSet<NodeId>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    n: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
    alpha: f64,
}

impl DirectedGraph {
    /// Builds a graph on `1..=n` with the given `(from, to)` edges and weight
    /// lower bound `alpha` (each consensus weight must be at least `alpha`).
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        alpha: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let mut set = BTreeSet::new();
        for (j, i) in edges {
            for node in [j, i] {
                if node < 1 || node > n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if j == i {
                return Err(Error::SelfLoop(j));
            }
            set.insert((j, i));
        }
        Ok(Self { n, edges: set, alpha })
    }

    /// Like [`DirectedGraph::new`] with the default bound `alpha = 1/(n+1)`,
    /// which any uniform weight rule satisfies.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let alpha = 1.0 / (n as f64 + 1.0);
        Self::new(n, edges, alpha)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    /// In-neighbors of `i`: all `j` with an edge `(j, i)`.
    ///
    /// Panics if `i` is outside `1..=n`.
    pub fn in_neighbors(&self, i: NodeId) -> BTreeSet<NodeId> {
        assert!(i >= 1 && i <= self.n, "node {i} outside 1..={}", self.n);
        self.edges
            .iter()
            .filter(|&&(_, to)| to == i)
            .map(|&(from, _)| from)
            .collect()
    }

    pub fn in_degree(&self, i: NodeId) -> usize {
        self.in_neighbors(i).len()
    }

    pub fn out_neighbors(&self, j: NodeId) -> BTreeSet<NodeId> {
        assert!(j >= 1 && j <= self.n, "node {j} outside 1..={}", self.n);
        self.edges
            .iter()
            .filter(|&&(from, _)| from == j)
            .map(|&(_, to)| to)
            .collect()
    }

    /// Nodes of `subset` with at least `r` in-neighbors outside `subset`.
    /// For `r = 0` this is the subset itself.
    pub fn r_reachable(&self, subset: &BTreeSet<NodeId>, r: usize) -> Result<BTreeSet<NodeId>> {
        for &node in subset {
            if node < 1 || node > self.n {
                return Err(Error::NodeOutOfRange { node, n: self.n });
            }
        }
        Ok(subset
            .iter()
            .copied()
            .filter(|&i| {
                self.in_neighbors(i)
                    .iter()
                    .filter(|j| !subset.contains(j))
                    .count()
                    >= r
            })
            .collect())
    }

    /// Exact (r, s)-robustness: for every pair of nonempty disjoint subsets
    /// V1, V2, either all of V1 or all of V2 has `r` in-edges from outside its
    /// own set, or the two sets together contain at least `s` such nodes.
    ///
    /// Requires `r < n` and `1 <= s < n`; the enumeration is capped at
    /// [`MAX_ROBUSTNESS_NODES`] nodes.
    pub fn is_r_s_robust(&self, r: usize, s: usize) -> Result<RobustnessReport> {
        let n = self.n;
        if r >= n || s < 1 || s >= n {
            return Err(Error::RobustnessParams { r, s, n });
        }
        if n > MAX_ROBUSTNESS_NODES {
            return Err(Error::GraphTooLarge { n, max: MAX_ROBUSTNESS_NODES });
        }
        if n > ROBUSTNESS_WARN_NODES {
            log::warn!("robustness check on n={n} enumerates 3^{n} subset pairs; expect delays");
        }

        let masks = self.in_masks();
        let full: u32 = (1u32 << n) - 1;
        // The definition is symmetric in (V1, V2), so each unordered pair is
        // visited once: the lowest-indexed node of the union goes to V1.
        for v1 in 1..=full {
            let (all1, c1) = reach_stats(&masks, v1, r);
            if all1 || c1 >= s {
                continue; // condition satisfied for every choice of V2
            }
            let below = (1u32 << v1.trailing_zeros()) - 1;
            let comp = full & !v1 & !below;
            let mut v2 = comp;
            while v2 != 0 {
                let (all2, c2) = reach_stats(&masks, v2, r);
                if !all2 && c1 + c2 < s {
                    return Ok(RobustnessReport {
                        r,
                        s,
                        holds: false,
                        witness: Some((mask_to_set(v1), mask_to_set(v2))),
                    });
                }
                v2 = (v2 - 1) & comp;
            }
        }
        Ok(RobustnessReport { r, s, holds: true, witness: None })
    }

    /// Largest `r` such that the graph is r-robust (i.e. (r, 1)-robust).
    /// Bounded above by `ceil(n/2)`; requires `n >= 2`.
    pub fn max_r_robustness(&self) -> Result<usize> {
        if self.n < 2 {
            return Err(Error::RobustnessParams { r: 1, s: 1, n: self.n });
        }
        for r in (1..=self.n.div_ceil(2)).rev() {
            if self.is_r_s_robust(r, 1)?.holds {
                return Ok(r);
            }
        }
        Ok(0)
    }

    /// True iff some node has a directed path to every other node.
    pub fn has_directed_spanning_tree(&self) -> bool {
        (1..=self.n).any(|root| self.reachable_from(root).len() == self.n)
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        if self.reachable_from(1).len() != self.n {
            return false;
        }
        // Backward pass: everyone must also reach node 1.
        let mut seen = BTreeSet::from([1]);
        let mut queue = VecDeque::from([1]);
        while let Some(i) = queue.pop_front() {
            for j in self.in_neighbors(i) {
                if seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        seen.len() == self.n
    }

    fn reachable_from(&self, root: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(j) = queue.pop_front() {
            for i in self.out_neighbors(j) {
                if seen.insert(i) {
                    queue.push_back(i);
                }
            }
        }
        seen
    }

    /// Copy with the listed edges removed; each must be present.
    pub fn without_edges(&self, remove: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut edges = self.edges.clone();
        for &(j, i) in remove {
            if !edges.remove(&(j, i)) {
                return Err(Error::MissingEdge(j, i));
            }
        }
        Ok(Self { n: self.n, edges, alpha: self.alpha })
    }

    /// Copy with the listed edges added; each must be new.
    pub fn with_edges(&self, add: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Self::new(self.n, self.edges.iter().copied().chain(add.iter().copied()), self.alpha)?;
        if g.edges.len() != self.edges.len() + add.len() {
            for &(j, i) in add {
                if self.edges.contains(&(j, i)) {
                    return Err(Error::DuplicateEdge(j, i));
                }
            }
        }
        g.alpha = self.alpha;
        Ok(g)
    }

    /// Parses the plain-text format: first line `n`, then one `from to` pair
    /// per line. Blank lines and `#` comments are allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if fields.len() != 1 {
                        return Err(Error::Parse(format!(
                            "line {lineno}: expected node count, got {line:?}"
                        )));
                    }
                    n = Some(parse_field(fields[0], lineno)?);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(Error::Parse(format!(
                            "line {lineno}: expected edge `from to`, got {line:?}"
                        )));
                    }
                    edges.push((parse_field(fields[0], lineno)?, parse_field(fields[1], lineno)?));
                }
            }
        }
        let n = n.ok_or_else(|| Error::Parse("empty graph file".into()))?;
        Self::from_edges(n, edges)
    }

    /// Inverse of [`DirectedGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (j, i) in &self.edges {
            out.push_str(&format!("{j} {i}\n"));
        }
        out
    }

    /// Bit `i-1` of `masks[k-1]` is set iff `(i, k)` is an edge.
    fn in_masks(&self) -> Vec<u32> {
        let mut masks = vec![0u32; self.n];
        for &(j, i) in &self.edges {
            masks[i - 1] |= 1 << (j - 1);
        }
        masks
    }
}

fn parse_field(field: &str, lineno: usize) -> Result<usize> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {lineno}: invalid integer {field:?}")))
}

/// For the subset given as a bitmask: (whether every node has >= r in-edges
/// from outside the subset, number of such nodes).
fn reach_stats(masks: &[u32], subset: u32, r: usize) -> (bool, usize) {
    let mut count = 0usize;
    let mut rest = subset;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (masks[i] & !subset).count_ones() as usize >= r {
            count += 1;
        }
    }
    (count == subset.count_ones() as usize, count)
}

fn mask_to_set(mask: u32) -> BTreeSet<NodeId> {
    (0..u32::BITS)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| b as NodeId + 1)
        .collect()
}
