//! Capacitated Dsatur coloring: a proper coloring of the conflict graph in
//! which each color (pilot) is used by at most `reuse_cap` users.

use std::fmt;

use crate::conflict_graph::{vertex_degrees, ConflictGraph};

/// Partial map from user to pilot index, with the per-pilot user groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotAssignment {
    pilot_of: Vec<Option<usize>>,
    groups: Vec<Vec<usize>>,
}

impl PilotAssignment {
    pub fn unassigned(num_users: usize) -> Self {
        Self {
            pilot_of: vec![None; num_users],
            groups: Vec::new(),
        }
    }

    /// Builds an assignment from a per-user pilot map. Pilot indices are
    /// relabelled to be contiguous in order of first appearance.
    pub fn from_pilots(pilots: &[Option<usize>]) -> Self {
        let mut relabel: Vec<(usize, usize)> = Vec::new();
        let mut out = Self::unassigned(pilots.len());
        for (user, p) in pilots.iter().enumerate() {
            let Some(p) = *p else { continue };
            let color = match relabel.iter().find(|(orig, _)| *orig == p) {
                Some(&(_, c)) => c,
                None => {
                    relabel.push((p, relabel.len()));
                    relabel.len() - 1
                }
            };
            out.assign(user, color);
        }
        out
    }

    /// Every listed user on its own pilot, in list order.
    pub fn orthogonal(num_users: usize, users: &[usize]) -> Self {
        let mut out = Self::unassigned(num_users);
        for (color, &u) in users.iter().enumerate() {
            out.assign(u, color);
        }
        out
    }

    fn assign(&mut self, user: usize, color: usize) {
        if color == self.groups.len() {
            self.groups.push(Vec::new());
        }
        self.pilot_of[user] = Some(color);
        self.groups[color].push(user);
    }

    pub fn pilot_of(&self, user: usize) -> Option<usize> {
        self.pilot_of[user]
    }

    pub fn pilots(&self) -> &[Option<usize>] {
        &self.pilot_of
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Number of pilots in use, `n*`.
    pub fn colors_used(&self) -> usize {
        self.groups.len()
    }

    pub fn num_users(&self) -> usize {
        self.pilot_of.len()
    }

    pub fn assigned_users(&self) -> Vec<usize> {
        (0..self.pilot_of.len())
            .filter(|&k| self.pilot_of[k].is_some())
            .collect()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.groups.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Colors every active user of `graph`.
///
/// Vertex order: highest saturation degree, then highest degree, then lowest
/// user index. Each vertex takes the lowest color not used by a neighbor and
/// still below `reuse_cap`; a new color is opened only when none qualifies.
pub fn dsatur_color(graph: &ConflictGraph, reuse_cap: usize) -> PilotAssignment {
    assert!(reuse_cap >= 1, "reuse cap must be at least 1");
    let n = graph.num_users();
    let degree = vertex_degrees(graph);
    let mut result = PilotAssignment::unassigned(n);
    // neighbor_colors[v][c]: some colored neighbor of v holds color c
    let mut neighbor_colors: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut saturation = vec![0usize; n];

    for _ in 0..graph.active().len() {
        let v = graph
            .active()
            .iter()
            .copied()
            .filter(|&u| result.pilot_of[u].is_none())
            .max_by(|&a, &b| {
                saturation[a]
                    .cmp(&saturation[b])
                    .then(degree[a].cmp(&degree[b]))
                    .then(b.cmp(&a))
            })
            .expect("an uncolored vertex remains");

        let color = (0..result.groups.len())
            .find(|&c| !neighbor_colors[v].get(c).copied().unwrap_or(false) && result.groups[c].len() < reuse_cap)
            .unwrap_or(result.groups.len());
        result.assign(v, color);

        for u in graph.neighbors(v) {
            if result.pilot_of[u].is_some() {
                continue;
            }
            let seen = &mut neighbor_colors[u];
            if seen.len() <= color {
                seen.resize(color + 1, false);
            }
            if !seen[color] {
                seen[color] = true;
                saturation[u] += 1;
            }
        }
    }
    result
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two adjacent users share a pilot.
    Adjacency { a: usize, b: usize, pilot: usize },
    /// A pilot is reused more than the cap allows.
    Multiplicity { pilot: usize, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Adjacency { a, b, pilot } => {
                write!(f, "adjacent users {a} and {b} both on pilot {pilot}")
            }
            Violation::Multiplicity { pilot, count } => {
                write!(f, "pilot {pilot} used by {count} users")
            }
        }
    }
}

/// Returns the first adjacency or multiplicity violation, if any.
pub fn validate_assignment(
    graph: &ConflictGraph,
    assignment: &PilotAssignment,
    reuse_cap: usize,
) -> Result<(), Violation> {
    for (pilot, group) in assignment.groups().iter().enumerate() {
        for (ai, &a) in group.iter().enumerate() {
            if let Some(&b) = group[ai + 1..].iter().find(|&&b| graph.has_edge(a, b)) {
                return Err(Violation::Adjacency {
                    a: a.min(b),
                    b: a.max(b),
                    pilot,
                });
            }
        }
        if group.len() > reuse_cap {
            return Err(Violation::Multiplicity {
                pilot,
                count: group.len(),
            });
        }
    }
    Ok(())
}
