//! Joint user selection and pilot allocation for a fixed pilot budget.
//!
//! The base conflict graph is colored first. When more pilots are needed
//! than are available, users are removed one at a time (highest conflict
//! degree first, pilot interference as tie-break) until the coloring fits.
//! When pilots are left over, extra edges between strongly interfering users
//! are added through an interference threshold so the whole budget is used to
//! separate them.

use std::collections::HashMap;

use serde::Serialize;

use crate::coloring::{dsatur_color, PilotAssignment};
use crate::conflict_graph::{
    build_base_graph, build_thresholded_graph, interference_score, vertex_degrees, ConflictGraph, InterferenceWeights,
};
use crate::topology::NetworkInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// More pilots required than available; users were removed.
    CaseI,
    /// Fewer pilots required than available; pilots were reallocated.
    CaseII,
    /// The base coloring uses exactly the available pilots.
    Exact,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::CaseI => "CaseI",
            Case::CaseII => "CaseII",
            Case::Exact => "Exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Result {
    /// Admitted users, ascending.
    pub admitted: Vec<usize>,
    pub assignment: PilotAssignment,
    pub case_taken: Case,
    /// Users removed, in removal order.
    pub removal_trace: Vec<usize>,
    /// Interference threshold chosen by the reallocation step.
    pub threshold: Option<f64>,
    /// Pilots needed by the base coloring of all users.
    pub initial_colors: usize,
}

impl Stage1Result {
    pub fn colors_used(&self) -> usize {
        self.assignment.colors_used()
    }
}

/// Clusters plus pairwise interference weights: everything Stage I reads.
#[derive(Debug, Clone)]
pub struct PilotProblem<'a> {
    pub clusters: &'a [Vec<usize>],
    pub eta: InterferenceWeights,
}

impl<'a> PilotProblem<'a> {
    pub fn new(instance: &'a NetworkInstance) -> Self {
        Self {
            clusters: &instance.clusters,
            eta: InterferenceWeights::compute(&instance.alpha, &instance.clusters),
        }
    }

    pub fn from_parts(clusters: &'a [Vec<usize>], eta: InterferenceWeights) -> Self {
        Self { clusters, eta }
    }

    pub fn num_users(&self) -> usize {
        self.clusters.len()
    }

    pub fn all_users(&self) -> Vec<usize> {
        (0..self.num_users()).collect()
    }

    pub fn base_graph(&self) -> ConflictGraph {
        build_base_graph(self.clusters, &self.all_users())
    }
}

/// Full Stage I: colors the base graph and dispatches on the pilot budget.
pub fn run_stage1(problem: &PilotProblem<'_>, pilots: usize, reuse_cap: usize) -> Stage1Result {
    assert!(pilots >= 1, "at least one pilot is required");
    let base = problem.base_graph();
    let initial = dsatur_color(&base, reuse_cap);
    let needed = initial.colors_used();
    if needed > pilots {
        select_users_case1(problem, pilots, reuse_cap)
    } else if needed < pilots {
        reallocate_case2(problem, pilots, reuse_cap)
    } else {
        exact_result(problem, initial)
    }
}

pub(crate) fn exact_result(problem: &PilotProblem<'_>, assignment: PilotAssignment) -> Stage1Result {
    Stage1Result {
        admitted: problem.all_users(),
        initial_colors: assignment.colors_used(),
        assignment,
        case_taken: Case::Exact,
        removal_trace: Vec::new(),
        threshold: None,
    }
}

/// Removes users until the coloring fits in `pilots` colors.
///
/// Each round removes the active user of highest degree. Ties go to the
/// largest interference score on the current pilot groups, then the lowest
/// index.
pub fn select_users_case1(problem: &PilotProblem<'_>, pilots: usize, reuse_cap: usize) -> Stage1Result {
    remove_until_fits(problem, pilots, reuse_cap, |graph, assignment| {
        let degree = vertex_degrees(graph);
        let score = |k: usize| interference_score(&problem.eta, assignment, k).expect("active users are colored");
        graph
            .active()
            .iter()
            .copied()
            .max_by(|&a, &b| {
                degree[a]
                    .cmp(&degree[b])
                    .then(score(a).total_cmp(&score(b)))
                    .then(b.cmp(&a))
            })
            .expect("a user remains while colors exceed the budget")
    })
}

/// Case I loop with a pluggable removal rule.
pub(crate) fn remove_until_fits(
    problem: &PilotProblem<'_>,
    pilots: usize,
    reuse_cap: usize,
    mut choose: impl FnMut(&ConflictGraph, &PilotAssignment) -> usize,
) -> Stage1Result {
    let mut graph = problem.base_graph();
    let mut assignment = dsatur_color(&graph, reuse_cap);
    let initial_colors = assignment.colors_used();
    let mut trace = Vec::new();
    while assignment.colors_used() > pilots {
        let victim = choose(&graph, &assignment);
        trace.push(victim);
        graph = graph.without(victim);
        assignment = dsatur_color(&graph, reuse_cap);
    }
    let case_taken = if trace.is_empty() {
        if initial_colors == pilots {
            Case::Exact
        } else {
            Case::CaseII
        }
    } else {
        Case::CaseI
    };
    Stage1Result {
        admitted: graph.active().to_vec(),
        assignment,
        case_taken,
        removal_trace: trace,
        threshold: None,
        initial_colors,
    }
}

/// Candidate interference thresholds, ascending: a floor that connects every
/// pair, the distinct pairwise weights, and a ceiling above the largest one.
pub fn threshold_candidates(eta: &InterferenceWeights, active: &[usize]) -> Vec<f64> {
    let values = eta.distinct_values(active);
    let top = values.last().copied().unwrap_or(0.0) + 1.0;
    let mut out = Vec::with_capacity(values.len() + 2);
    out.push(0.0);
    out.extend(values.into_iter().filter(|&v| v > 0.0));
    out.push(top);
    out
}

/// Reallocates pilots among all users when the base coloring leaves some
/// unused: picks the smallest threshold whose thresholded graph still fits
/// in `pilots` colors.
pub fn reallocate_case2(problem: &PilotProblem<'_>, pilots: usize, reuse_cap: usize) -> Stage1Result {
    let users = problem.all_users();
    let base = problem.base_graph();
    let initial_colors = dsatur_color(&base, reuse_cap).colors_used();
    let candidates = threshold_candidates(&problem.eta, &users);

    let mut cache: HashMap<usize, PilotAssignment> = HashMap::new();
    let mut coloring_at = |idx: usize| -> PilotAssignment {
        cache
            .entry(idx)
            .or_insert_with(|| {
                dsatur_color(
                    &build_thresholded_graph(&base, &problem.eta, candidates[idx]),
                    reuse_cap,
                )
            })
            .clone()
    };

    // The top candidate reproduces the base graph, which fits.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if coloring_at(mid).colors_used() <= pilots {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let assignment = coloring_at(hi);
    debug_assert!(assignment.colors_used() <= pilots);
    Stage1Result {
        admitted: users,
        assignment,
        case_taken: Case::CaseII,
        removal_trace: Vec::new(),
        threshold: Some(candidates[hi]),
        initial_colors,
    }
}
