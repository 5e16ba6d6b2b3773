//! Reference Stage I schemes the proposed allocation is compared against.

use rand::seq::index::sample;
use rand::Rng;

use crate::coloring::{dsatur_color, PilotAssignment};
use crate::stage1::{exact_result, remove_until_fits, select_users_case1, Case, PilotProblem, Stage1Result};

fn classify(needed: usize, pilots: usize) -> Case {
    match needed.cmp(&pilots) {
        std::cmp::Ordering::Greater => Case::CaseI,
        std::cmp::Ordering::Less => Case::CaseII,
        std::cmp::Ordering::Equal => Case::Exact,
    }
}

/// `min(tau, K)` users drawn uniformly at random, each on its own pilot.
///
/// `case_taken` reports where the base coloring would have put the instance.
pub fn baseline_ortho<R: Rng + ?Sized>(
    problem: &PilotProblem<'_>,
    pilots: usize,
    reuse_cap: usize,
    rng: &mut R,
) -> Stage1Result {
    let k = problem.num_users();
    let mut admitted: Vec<usize> = sample(rng, k, pilots.min(k)).into_vec();
    admitted.sort_unstable();
    let needed = dsatur_color(&problem.base_graph(), reuse_cap).colors_used();
    let removal_trace = (0..k).filter(|u| admitted.binary_search(u).is_err()).collect();
    Stage1Result {
        assignment: PilotAssignment::orthogonal(k, &admitted),
        admitted,
        case_taken: classify(needed, pilots),
        removal_trace,
        threshold: None,
        initial_colors: needed,
    }
}

/// Proposed Stage I without the reallocation step: leftover pilots stay unused.
pub fn baseline_nocase2(problem: &PilotProblem<'_>, pilots: usize, reuse_cap: usize) -> Stage1Result {
    let base = dsatur_color(&problem.base_graph(), reuse_cap);
    match classify(base.colors_used(), pilots) {
        Case::CaseI => select_users_case1(problem, pilots, reuse_cap),
        case => Stage1Result {
            case_taken: case,
            ..exact_result(problem, base)
        },
    }
}

/// Like [`baseline_nocase2`], but users are removed uniformly at random
/// until the coloring fits.
pub fn baseline_con<R: Rng + ?Sized>(
    problem: &PilotProblem<'_>,
    pilots: usize,
    reuse_cap: usize,
    rng: &mut R,
) -> Stage1Result {
    let base = dsatur_color(&problem.base_graph(), reuse_cap);
    match classify(base.colors_used(), pilots) {
        Case::CaseI => remove_until_fits(problem, pilots, reuse_cap, |graph, _| {
            let active = graph.active();
            active[rng.random_range(0..active.len())]
        }),
        case => Stage1Result {
            case_taken: case,
            ..exact_result(problem, base)
        },
    }
}
