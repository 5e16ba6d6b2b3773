//! Pilot-conflict graph and pairwise pilot-interference weights.
//!
//! Two users conflict when their candidate clusters share an RRH: they must
//! never reuse a pilot. The interference weight `eta` measures how much two
//! users with disjoint clusters would still contaminate each other if they
//! shared a pilot, and drives both user removal and pilot reallocation.

use std::io::Write;

use crate::coloring::PilotAssignment;
use crate::error::{Error, Result};
use crate::topology::LargeScale;

/// Undirected conflict graph over a subset of active users.
///
/// Stored as a dense adjacency over the full user universe; inactive users
/// have no edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    num_users: usize,
    active: Vec<usize>,
    adjacency: Vec<bool>,
}

impl ConflictGraph {
    pub fn empty(num_users: usize, active: &[usize]) -> Self {
        let mut active = active.to_vec();
        active.sort_unstable();
        active.dedup();
        Self {
            num_users,
            active,
            adjacency: vec![false; num_users * num_users],
        }
    }

    /// Builds a graph from an explicit edge list. Edges touching inactive
    /// users or self-loops are ignored.
    pub fn from_edges(num_users: usize, active: &[usize], edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(num_users, active);
        for &(a, b) in edges {
            if g.is_active(a) && g.is_active(b) {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, user: usize) -> bool {
        self.active.binary_search(&user).is_ok()
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a * self.num_users + b]
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = self.num_users;
        self.adjacency[a * n + b] = true;
        self.adjacency[b * n + a] = true;
    }

    pub fn neighbors(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().copied().filter(move |&o| self.has_edge(user, o))
    }

    pub fn degree(&self, user: usize) -> usize {
        self.neighbors(user).count()
    }

    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for (ai, &a) in self.active.iter().enumerate() {
            for &b in &self.active[ai + 1..] {
                count += usize::from(self.has_edge(a, b));
            }
        }
        count
    }

    /// Same edges, restricted to `active` users.
    pub fn restrict(&self, active: &[usize]) -> Self {
        let mut g = Self::empty(self.num_users, active);
        for (ai, &a) in g.active.clone().iter().enumerate() {
            for &b in &g.active.clone()[ai + 1..] {
                if self.has_edge(a, b) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    /// Copy of this graph with user `k` deactivated.
    pub fn without(&self, user: usize) -> Self {
        let remaining: Vec<usize> = self.active.iter().copied().filter(|&u| u != user).collect();
        self.restrict(&remaining)
    }
}

/// Symmetric matrix of pilot-interference weights over all users.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceWeights {
    num_users: usize,
    eta: Vec<f64>,
}

impl InterferenceWeights {
    pub fn compute(alpha: &LargeScale, clusters: &[Vec<usize>]) -> Self {
        let n = clusters.len();
        let mut eta = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let v = pilot_interference(alpha, clusters, a, b);
                eta[a * n + b] = v;
                eta[b * n + a] = v;
            }
        }
        Self { num_users: n, eta }
    }

    /// Builds weights from a dense row-major matrix. The diagonal is zeroed.
    pub fn from_matrix(num_users: usize, mut eta: Vec<f64>) -> Self {
        assert_eq!(eta.len(), num_users * num_users);
        for k in 0..num_users {
            eta[k * num_users + k] = 0.0;
        }
        Self { num_users, eta }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.eta[a * self.num_users + b]
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// Sorted distinct off-diagonal weights among `active` users.
    pub fn distinct_values(&self, active: &[usize]) -> Vec<f64> {
        let mut values = Vec::new();
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                values.push(self.get(a, b));
            }
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }
}

/// Pilot interference between users `k` and `other` if they shared a pilot:
/// each side's gain from the other's cluster relative to its own cluster gain.
pub fn pilot_interference(alpha: &LargeScale, clusters: &[Vec<usize>], k: usize, other: usize) -> f64 {
    let own_k = alpha.sum_over(&clusters[k], k);
    let leak_k = alpha.sum_over(&clusters[other], k);
    let own_o = alpha.sum_over(&clusters[other], other);
    let leak_o = alpha.sum_over(&clusters[k], other);
    (leak_k / own_k).ln_1p() + (leak_o / own_o).ln_1p()
}

/// Users conflict iff their clusters intersect.
pub fn build_base_graph(clusters: &[Vec<usize>], active: &[usize]) -> ConflictGraph {
    let mut g = ConflictGraph::empty(clusters.len(), active);
    let act = g.active.clone();
    for (ai, &a) in act.iter().enumerate() {
        for &b in &act[ai + 1..] {
            if clusters[a].iter().any(|i| clusters[b].contains(i)) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Adds an edge between every pair of users with disjoint clusters whose
/// interference weight strictly exceeds `threshold`.
pub fn build_thresholded_graph(base: &ConflictGraph, eta: &InterferenceWeights, threshold: f64) -> ConflictGraph {
    let mut g = base.clone();
    let act = base.active.clone();
    for (ai, &a) in act.iter().enumerate() {
        for &b in &act[ai + 1..] {
            if !base.has_edge(a, b) && eta.get(a, b) > threshold {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Degrees indexed by user id; inactive users report 0.
pub fn vertex_degrees(graph: &ConflictGraph) -> Vec<usize> {
    let mut deg = vec![0; graph.num_users];
    for &k in &graph.active {
        deg[k] = graph.degree(k);
    }
    deg
}

/// Total interference weight between `k` and the other users on its pilot.
pub fn interference_score(eta: &InterferenceWeights, assignment: &PilotAssignment, k: usize) -> Result<f64> {
    let pilot = assignment
        .pilot_of(k)
        .ok_or_else(|| Error::InvalidQuery(format!("user {k} has no pilot")))?;
    Ok(assignment.groups()[pilot]
        .iter()
        .filter(|&&o| o != k)
        .map(|&o| eta.get(k, o))
        .sum())
}

/// Writes `B` and `eta` as two CSV matrices keyed by user id.
pub fn dump_csv<W: Write>(graph: &ConflictGraph, eta: &InterferenceWeights, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let ids = graph.active();
    let header = |name: &str| -> Vec<String> {
        std::iter::once(name.to_string())
            .chain(ids.iter().map(|k| k.to_string()))
            .collect()
    };
    w.write_record(header("B"))?;
    for &a in ids {
        let row = std::iter::once(a.to_string()).chain(ids.iter().map(|&b| u8::from(graph.has_edge(a, b)).to_string()));
        w.write_record(row)?;
    }
    w.write_record(header("eta"))?;
    for &a in ids {
        let row = std::iter::once(a.to_string()).chain(ids.iter().map(|&b| format!("{:.6e}", eta.get(a, b))));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
