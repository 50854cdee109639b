//! Inhibition digraphs, `(n, m)` ring construction and independent-set
//! enumeration.
//!
//! Edge convention: `inhibits(a, b)` is true when node `a` appears in the
//! exponent of node `b`'s update, i.e. `a` suppresses `b`. Every other module
//! goes through [`CouplingGraph::inhibits`], [`CouplingGraph::inhibitors_of`]
//! and [`CouplingGraph::targets_of`] rather than touching the matrix.
//!
//! Nodes are 0-based inside the crate. Everything that is printed, parsed or
//! serialized uses 1-based labels.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `n` for exhaustive independent-set enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Shape of an `(n, m)`-ring: node `k` is inhibited by `k-1, ..., k-m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingShape {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone)]
pub struct CouplingGraph {
    n: usize,
    adj: Vec<bool>,
    label: Option<String>,
    ring: Option<RingShape>,
}

impl PartialEq for CouplingGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.adj == other.adj
    }
}

impl Eq for CouplingGraph {}

impl CouplingGraph {
    /// Build the `(n, m)`-ring graph.
    pub fn ring(n: usize, m: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("ring needs n >= 3, got n = {n}")));
        }
        if m == 0 || 2 * m >= n {
            return Err(Error::Domain(format!(
                "ring needs 1 <= m < n/2, got n = {n}, m = {m}"
            )));
        }
        let mut adj = vec![false; n * n];
        for from in 0..n {
            for d in 1..=m {
                adj[from * n + (from + d) % n] = true;
            }
        }
        Ok(Self {
            n,
            adj,
            label: Some(format!("({n},{m})-ring")),
            ring: Some(RingShape { n, m }),
        })
    }

    /// Wrap a square boolean matrix, `matrix[a][b]` meaning `a` inhibits `b`.
    pub fn from_adjacency(matrix: &[Vec<bool>]) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Validation("empty adjacency matrix".into()));
        }
        let mut adj = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "row {} has length {}, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            if row[i] {
                return Err(Error::Validation(format!("self-inhibition at node {}", i + 1)));
            }
            adj.extend_from_slice(row);
        }
        let mut g = Self {
            n,
            adj,
            label: None,
            ring: None,
        };
        g.ring = g.detect_ring();
        Ok(g)
    }

    /// Build from a 1-based edge list `(from, to)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut matrix = vec![vec![false; n]; n];
        for &(from, to) in edges {
            if from == 0 || to == 0 || from > n || to > n {
                return Err(Error::Validation(format!(
                    "edge ({from},{to}) out of range for n = {n}"
                )));
            }
            matrix[from - 1][to - 1] = true;
        }
        Self::from_adjacency(&matrix)
    }

    fn detect_ring(&self) -> Option<RingShape> {
        let n = self.n;
        (1..).take_while(|m| 2 * m < n).find_map(|m| {
            let matches = (0..n).all(|a| {
                (0..n).all(|b| {
                    let d = (b + n - a) % n;
                    self.inhibits(a, b) == (d >= 1 && d <= m)
                })
            });
            matches.then_some(RingShape { n, m })
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn ring_shape(&self) -> Option<RingShape> {
        self.ring
    }

    /// True when `from` suppresses `to`.
    #[inline]
    pub fn inhibits(&self, from: usize, to: usize) -> bool {
        self.adj[from * self.n + to]
    }

    /// Nodes that suppress `node`, ascending.
    pub fn inhibitors_of(&self, node: usize) -> Vec<usize> {
        (0..self.n).filter(|&a| self.inhibits(a, node)).collect()
    }

    /// Nodes suppressed by `node`, ascending.
    pub fn targets_of(&self, node: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.inhibits(node, b)).collect()
    }

    /// 1-based edge list in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.inhibits(a, b) {
                    out.push((a + 1, b + 1));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    pub fn is_independent(&self, set: &ActiveSet) -> bool {
        let m = set.members();
        m.iter()
            .all(|&a| m.iter().all(|&b| a == b || !self.inhibits(a, b)))
    }
}

/// Build an `(n, m)`-ring graph.
pub fn make_ring(n: usize, m: usize) -> Result<CouplingGraph> {
    CouplingGraph::ring(n, m)
}

pub fn from_adjacency(matrix: &[Vec<bool>]) -> Result<CouplingGraph> {
    CouplingGraph::from_adjacency(matrix)
}

/// A set of simultaneously active nodes (stored 0-based, sorted).
///
/// Ordering is by size first, then lexicographic on the members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActiveSet(Vec<usize>);

impl ActiveSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// From 1-based labels. Zero is rejected.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::Validation("node labels are 1-based".into()));
        }
        Ok(Self::new(labels.iter().map(|&l| l - 1).collect()))
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&k| k + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    pub fn with(&self, node: usize) -> Self {
        let mut v = self.0.clone();
        v.push(node);
        Self::new(v)
    }

    pub fn without_all(&self, drop: &[usize]) -> Self {
        Self(self.0.iter().copied().filter(|k| !drop.contains(k)).collect())
    }

    /// Apply `sigma^shift` on an `n`-node ring: node `k` goes to `k + shift`.
    pub fn rotated(&self, n: usize, shift: usize) -> Self {
        Self::new(self.0.iter().map(|&k| (k + shift) % n).collect())
    }

    /// Comma-separated 1-based labels, e.g. `1,3`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|k| (k + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl Ord for ActiveSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ActiveSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi_{{{}}}", self.label())
    }
}

impl Serialize for ActiveSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ActiveSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(d)?;
        ActiveSet::from_one_based(&labels).map_err(serde::de::Error::custom)
    }
}

/// All independent sets (including the empty set), sorted by size then
/// lexicographically. Fails when `n` exceeds [`DEFAULT_ENUMERATION_CAP`].
pub fn independent_sets(g: &CouplingGraph) -> Result<Vec<ActiveSet>> {
    independent_sets_capped(g, DEFAULT_ENUMERATION_CAP)
}

pub fn independent_sets_capped(g: &CouplingGraph, cap: usize) -> Result<Vec<ActiveSet>> {
    if g.n() > cap {
        return Err(Error::LimitExceeded(format!(
            "independent-set enumeration capped at n = {cap}, graph has n = {}",
            g.n()
        )));
    }
    // conflict[k] = nodes that cannot share an active set with k
    let conflict: Vec<Vec<usize>> = (0..g.n())
        .map(|k| {
            (0..g.n())
                .filter(|&o| o != k && (g.inhibits(k, o) || g.inhibits(o, k)))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut blocked = vec![0usize; g.n()];
    extend_sets(0, &conflict, &mut blocked, &mut current, &mut out);
    out.sort();
    Ok(out)
}

fn extend_sets(
    next: usize,
    conflict: &[Vec<usize>],
    blocked: &mut [usize],
    current: &mut Vec<usize>,
    out: &mut Vec<ActiveSet>,
) {
    if next == conflict.len() {
        out.push(ActiveSet(current.clone()));
        return;
    }
    extend_sets(next + 1, conflict, blocked, current, out);
    if blocked[next] == 0 {
        for &o in &conflict[next] {
            blocked[o] += 1;
        }
        current.push(next);
        extend_sets(next + 1, conflict, blocked, current, out);
        current.pop();
        for &o in &conflict[next] {
            blocked[o] -= 1;
        }
    }
}

/// Suppressed and growing nodes at an active set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuppressionProfile {
    /// node -> suppression number (count of active inhibitors), 0-based keys
    pub suppressed: BTreeMap<usize, usize>,
    pub growing: Vec<usize>,
}

impl SuppressionProfile {
    pub fn suppression_number(&self, node: usize) -> Option<usize> {
        self.suppressed.get(&node).copied()
    }

    pub fn is_growing(&self, node: usize) -> bool {
        self.growing.binary_search(&node).is_ok()
    }
}

pub fn suppression_profile(g: &CouplingGraph, z: &ActiveSet) -> Result<SuppressionProfile> {
    if z.members().iter().any(|&k| k >= g.n()) {
        return Err(Error::Domain(format!("active set {z} out of range")));
    }
    if !g.is_independent(z) {
        return Err(Error::Domain(format!("{z} is not an independent set")));
    }
    let mut suppressed = BTreeMap::new();
    let mut growing = Vec::new();
    for node in (0..g.n()).filter(|&k| !z.contains(k)) {
        let count = z.members().iter().filter(|&&a| g.inhibits(a, node)).count();
        if count > 0 {
            suppressed.insert(node, count);
        } else {
            growing.push(node);
        }
    }
    Ok(SuppressionProfile { suppressed, growing })
}

/// Lucas numbers with `L_1 = 1`, `L_2 = 3`.
pub fn lucas(n: usize) -> u64 {
    let (mut a, mut b) = (2u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// Graph file format: `{"n": 5, "m": 1}` for rings or
/// `{"n": 4, "edges": [[1, 2], ...]}` with 1-based `[from, to]` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl GraphSpec {
    pub fn ring(n: usize, m: usize) -> Self {
        Self {
            n,
            m: Some(m),
            edges: None,
            label: None,
        }
    }

    pub fn build(&self) -> Result<CouplingGraph> {
        let g = match (&self.m, &self.edges) {
            (Some(m), None) => CouplingGraph::ring(self.n, *m)?,
            (None, Some(edges)) => {
                let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                CouplingGraph::from_edges(self.n, &pairs)?
            }
            (Some(_), Some(_)) => {
                return Err(Error::Validation("graph spec has both \"m\" and \"edges\"".into()))
            }
            (None, None) => {
                return Err(Error::Validation("graph spec needs \"m\" or \"edges\"".into()))
            }
        };
        Ok(match &self.label {
            Some(l) => g.with_label(l.clone()),
            None => g,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
