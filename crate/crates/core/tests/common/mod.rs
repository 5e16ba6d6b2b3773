//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use ucran::channel::{complex_gaussian, ChannelState, C64};
use ucran::conflict_graph::ConflictGraph;
use ucran::stage2::{evaluate_set, AdmissionSolution, PowerOutcome, Stage2Context};
use ucran::topology::LargeScale;

/// Exact minimum number of colors of a capacitated proper coloring, by
/// backtracking over all assignments (colors introduced in order).
pub fn exact_capacitated_colors(graph: &ConflictGraph, cap: usize) -> usize {
    let verts = graph.active().to_vec();
    if verts.is_empty() {
        return 0;
    }
    let lower = verts.len().div_ceil(cap);
    (lower..=verts.len())
        .find(|&c| {
            let mut color = vec![usize::MAX; graph.num_users()];
            let mut count = vec![0usize; c];
            colorable(graph, &verts, 0, c, cap, 0, &mut color, &mut count)
        })
        .expect("one color per vertex always works")
}

#[allow(clippy::too_many_arguments)]
fn colorable(
    g: &ConflictGraph,
    verts: &[usize],
    pos: usize,
    colors: usize,
    cap: usize,
    used: usize,
    color: &mut [usize],
    count: &mut [usize],
) -> bool {
    if pos == verts.len() {
        return true;
    }
    let v = verts[pos];
    for c in 0..colors.min(used + 1) {
        if count[c] >= cap || verts[..pos].iter().any(|&u| color[u] == c && g.has_edge(u, v)) {
            continue;
        }
        color[v] = c;
        count[c] += 1;
        if colorable(g, verts, pos + 1, colors, cap, used.max(c + 1), color, count) {
            return true;
        }
        count[c] -= 1;
        color[v] = usize::MAX;
    }
    false
}

/// Largest clique found by greedy growth from every start vertex.
pub fn greedy_clique_bound(graph: &ConflictGraph) -> usize {
    let act = graph.active();
    act.iter()
        .map(|&start| {
            let mut cands: Vec<usize> = graph.neighbors(start).collect();
            cands.sort_by_key(|&u| std::cmp::Reverse(graph.degree(u)));
            let mut clique = vec![start];
            for u in cands {
                if clique.iter().all(|&c| graph.has_edge(c, u)) {
                    clique.push(u);
                }
            }
            clique.len()
        })
        .max()
        .unwrap_or(0)
}

/// Random graph on `n` users, each edge present with probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> ConflictGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    ConflictGraph::from_edges(n, &(0..n).collect::<Vec<_>>(), &edges)
}

/// Gauss-Jordan elimination with partial pivoting on a dense complex system.
pub fn gauss_jordan_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let d = a[col][col];
        for z in a[col].iter_mut() {
            *z /= d;
        }
        b[col] /= d;
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (z, t) in a[r].iter_mut().zip(pivot_row) {
                    *z -= f * t;
                }
                let t = b[col];
                b[r] -= f * t;
            }
        }
    }
    b
}

/// Ergodic rate of every served user, averaging the instantaneous SINR over
/// fresh draws of the estimation error (intra-cluster) and of the whole
/// channel (untracked links), with the solution's beams and powers fixed.
pub fn monte_carlo_rates<R: Rng>(
    state: &ChannelState,
    alpha: &LargeScale,
    solution: &AdmissionSolution,
    noise_power: f64,
    draws: usize,
    rng: &mut R,
) -> Vec<f64> {
    let m = state.antennas();
    let served = &solution.served;
    let mut sums = vec![0.0; served.len()];
    let mut h = vec![C64::new(0.0, 0.0); m];
    for _ in 0..draws {
        for (kk, &k) in served.iter().enumerate() {
            let mut gains = vec![C64::new(0.0, 0.0); served.len()];
            // draw user k's channel once per RRH, reuse it for every beam
            let mut drawn: Vec<Option<Vec<C64>>> = vec![None; state.num_rrhs()];
            for (jj, beam) in solution.beams.iter().enumerate() {
                for (i, w) in beam.blocks() {
                    let link = drawn[i].get_or_insert_with(|| {
                        match state.estimate(i, k) {
                            Some(est) => {
                                let e = state.error_var(i, k);
                                for (a, z) in h.iter_mut().enumerate() {
                                    *z = est[a] + complex_gaussian(rng, e);
                                }
                            }
                            None => {
                                for z in h.iter_mut() {
                                    *z = complex_gaussian(rng, alpha.get(i, k));
                                }
                            }
                        }
                        h.clone()
                    });
                    gains[jj] += link.iter().zip(w).map(|(x, y)| x.conj() * y).sum::<C64>();
                }
            }
            let signal = solution.powers[kk] * gains[kk].norm_sqr();
            let interference: f64 = (0..served.len())
                .filter(|&j| j != kk)
                .map(|j| solution.powers[j] * gains[j].norm_sqr())
                .sum();
            sums[kk] += (1.0 + signal / (interference + noise_power)).log2();
        }
    }
    sums.into_iter().map(|s| s / draws as f64).collect()
}

/// Size of the largest subset of `candidates` the power stage can serve.
pub fn exhaustive_max_feasible(ctx: &Stage2Context<'_>, candidates: &[usize]) -> (usize, Vec<Vec<usize>>) {
    let n = candidates.len();
    let mut best = 0;
    let mut feasible_sets = Vec::new();
    for mask in 0u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| candidates[b]).collect();
        if is_feasible(ctx, &subset) {
            best = best.max(subset.len());
            feasible_sets.push(subset);
        }
    }
    (best, feasible_sets)
}

pub fn is_feasible(ctx: &Stage2Context<'_>, subset: &[usize]) -> bool {
    if subset.is_empty() {
        return true;
    }
    let eval = evaluate_set(ctx, subset);
    eval.dropped.is_empty() && matches!(eval.outcome, PowerOutcome::Feasible { .. })
}
