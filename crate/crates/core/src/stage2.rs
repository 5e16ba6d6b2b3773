//! Robust downlink admission for the users that survived pilot allocation.
//!
//! Each user is served by the RRHs of its candidate cluster that still have
//! fronthaul room. Beam directions are regularized MMSE directions built from
//! intra-cluster estimates, loaded with the estimation error variances and
//! with the large-scale gains of links the pool does not track. Rates are
//! evaluated through a lower bound that keeps only the estimated part of the
//! channel as useful signal and replaces every unknown quantity by its
//! expected power. Powers follow a standard-interference-function fixed point
//! under per-RRH caps; users are removed greedily until the remaining set is
//! feasible, then removed users are offered re-entry one at a time.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channel::{inner, norm_sqr, ChannelState, C64};
use crate::error::{Error, Result};
use crate::topology::LargeScale;

/// Iteration cap of the power fixed point.
pub const MAX_POWER_ITERATIONS: usize = 10_000;
/// Relative change below which the power fixed point is considered converged.
pub const POWER_TOLERANCE: f64 = 1e-8;
/// The power iteration aims slightly above each SINR target so that the
/// converged iterate, which approaches the fixed point from below, meets the
/// target exactly.
pub const TARGET_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub theta: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self { theta: 1e-3 }
    }
}

/// Smooth surrogate `x / (x + theta)` of the indicator `1{x > 0}`.
pub fn smooth_indicator(x: f64, params: SmoothingParams) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("indicator surrogate needs x >= 0, got {x}")));
    }
    Ok(x / (x + params.theta))
}

/// Tangent of the surrogate at `x0`, returned as `(intercept, slope)`. The
/// surrogate is concave, so the tangent majorizes it on `x >= 0`.
pub fn sca_linearize_indicator(x0: f64, params: SmoothingParams) -> Result<(f64, f64)> {
    let value = smooth_indicator(x0, params)?;
    let slope = params.theta / (x0 + params.theta).powi(2);
    Ok((value - slope * x0, slope))
}

/// Caps the number of users per fronthaul link.
///
/// Every admitted user starts from its candidate cluster. An RRH wanted by
/// more than `cap` users keeps the `cap` users with the largest gain to it
/// (ties to the lower index). Returned sets are indexed by user id; users
/// that are not admitted, or lost every RRH, get an empty set.
pub fn enforce_fronthaul_cap(
    clusters: &[Vec<usize>],
    admitted: &[usize],
    alpha: &LargeScale,
    cap: usize,
) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); clusters.len()];
    for &k in admitted {
        sets[k] = clusters[k].clone();
    }
    for i in 0..alpha.num_rrhs() {
        let mut users: Vec<usize> = admitted.iter().copied().filter(|&k| clusters[k].contains(&i)).collect();
        if users.len() <= cap {
            continue;
        }
        users.sort_by(|&a, &b| alpha.get(i, b).total_cmp(&alpha.get(i, a)).then(a.cmp(&b)));
        for &k in &users[cap..] {
            sets[k].retain(|&r| r != i);
        }
    }
    sets
}

/// A unit-norm beam over the stacked antennas of a serving set.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub rrhs: Vec<usize>,
    pub weights: Vec<C64>,
    antennas: usize,
}

impl Beam {
    pub fn new(rrhs: Vec<usize>, weights: Vec<C64>, antennas: usize) -> Self {
        assert_eq!(rrhs.len() * antennas, weights.len());
        Self {
            rrhs,
            weights,
            antennas,
        }
    }

    pub fn block(&self, rrh: usize) -> Option<&[C64]> {
        let pos = self.rrhs.iter().position(|&r| r == rrh)?;
        Some(&self.weights[pos * self.antennas..(pos + 1) * self.antennas])
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &[C64])> {
        self.rrhs.iter().copied().zip(self.weights.chunks(self.antennas))
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.weights).sqrt()
    }
}

/// Regularized MMSE directions for every user in `served`, each over its own
/// serving set.
///
/// For user `k` the direction is `(sigma^2 I + sum_j R_j)^{-1} h_hat_k`,
/// normalized, where `R_j` restricted to the antennas of `S_k` is
/// `h_hat_j h_hat_j^H` on blocks with an estimate plus a diagonal loading of
/// `e_{i,j}` (which is `alpha_{i,j}` on untracked links).
pub fn robust_beam_direction(
    state: &ChannelState,
    serving: &[Vec<usize>],
    served: &[usize],
    noise_power: f64,
) -> Vec<Beam> {
    let m = state.antennas();
    served
        .iter()
        .map(|&k| {
            let rrhs = &serving[k];
            assert!(!rrhs.is_empty(), "user {k} has no serving RRH");
            let n = rrhs.len() * m;
            let mut cov = DMatrix::<C64>::identity(n, n) * C64::new(noise_power, 0.0);
            let mut stacked = DVector::<C64>::zeros(n);
            for &j in served {
                stacked.fill(C64::new(0.0, 0.0));
                let mut coherent = false;
                for (b, &i) in rrhs.iter().enumerate() {
                    if let Some(h) = state.estimate(i, j) {
                        stacked.rows_mut(b * m, m).copy_from_slice(h);
                        coherent = true;
                    }
                    let load = state.error_var(i, j);
                    for a in 0..m {
                        cov[(b * m + a, b * m + a)] += load;
                    }
                }
                if coherent {
                    cov.gerc(C64::new(1.0, 0.0), &stacked, &stacked, C64::new(1.0, 0.0));
                }
            }
            let mut target = DVector::<C64>::zeros(n);
            for (b, &i) in rrhs.iter().enumerate() {
                let h = state.estimate(i, k).expect("serving RRHs are intra-cluster");
                target.rows_mut(b * m, m).copy_from_slice(h);
            }
            let w = cov
                .cholesky()
                .expect("noise-regularized covariance is positive definite")
                .solve(&target);
            let norm = w.norm();
            let weights = if norm > 0.0 {
                w.iter().map(|z| z / norm).collect()
            } else {
                // zero estimate: any unit vector works; pick the first antenna
                let mut v = vec![C64::new(0.0, 0.0); n];
                v[0] = C64::new(1.0, 0.0);
                v
            };
            Beam::new(rrhs.clone(), weights, m)
        })
        .collect()
}

/// Expected-power coefficients of the rate lower bound for a fixed set of
/// beams. `cross[k][j]` is the expected power user `k` receives from unit
/// power on beam `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub signal: Vec<f64>,
    pub self_error: Vec<f64>,
    pub cross: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn sinr(&self, powers: &[f64], noise_power: f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let interference: f64 = (0..self.len())
                    .filter(|&j| j != k)
                    .map(|j| powers[j] * self.cross[k][j])
                    .sum();
                let denom = powers[k] * self.self_error[k] + interference + noise_power;
                powers[k] * self.signal[k] / denom
            })
            .collect()
    }
}

/// Builds the lower-bound coefficients for users `served` with `beams`.
///
/// Inside the victim's cluster the estimated channel adds coherently and the
/// estimation error adds its variance; outside the cluster only the
/// large-scale gain is known.
pub fn rate_coupling(state: &ChannelState, served: &[usize], beams: &[Beam]) -> Coupling {
    let n = served.len();
    let mut signal = vec![0.0; n];
    let mut self_error = vec![0.0; n];
    let mut cross = vec![vec![0.0; n]; n];
    for (kk, &k) in served.iter().enumerate() {
        for (jj, beam) in beams.iter().enumerate() {
            let mut coherent = C64::new(0.0, 0.0);
            let mut incoherent = 0.0;
            for (i, w) in beam.blocks() {
                if let Some(h) = state.estimate(i, k) {
                    coherent += inner(h, w);
                }
                incoherent += state.error_var(i, k) * norm_sqr(w);
            }
            if jj == kk {
                signal[kk] = coherent.norm_sqr();
                self_error[kk] = incoherent;
            } else {
                cross[kk][jj] = coherent.norm_sqr() + incoherent;
            }
        }
    }
    Coupling {
        signal,
        self_error,
        cross,
    }
}

/// Per-user lower-bound rates in bit/s/Hz.
pub fn expected_rate_lb(coupling: &Coupling, powers: &[f64], noise_power: f64) -> Vec<f64> {
    coupling
        .sinr(powers, noise_power)
        .into_iter()
        .map(|s| (1.0 + s).log2())
        .collect()
}

/// Inputs of the power fixed point.
#[derive(Debug, Clone)]
pub struct PowerProblem {
    pub coupling: Coupling,
    pub targets: Vec<f64>,
    pub noise_power: f64,
    /// For every user, the `(rrh, fraction of its power on that rrh)` pairs.
    pub rrh_share: Vec<Vec<(usize, f64)>>,
    pub num_rrhs: usize,
    pub rrh_power_cap: f64,
}

impl PowerProblem {
    pub fn from_beams(
        coupling: Coupling,
        beams: &[Beam],
        targets: Vec<f64>,
        noise_power: f64,
        num_rrhs: usize,
        rrh_power_cap: f64,
    ) -> Self {
        let rrh_share = beams
            .iter()
            .map(|b| b.blocks().map(|(i, w)| (i, norm_sqr(w))).collect())
            .collect();
        Self {
            coupling,
            targets,
            noise_power,
            rrh_share,
            num_rrhs,
            rrh_power_cap,
        }
    }

    pub fn rrh_loads(&self, powers: &[f64]) -> Vec<f64> {
        let mut load = vec![0.0; self.num_rrhs];
        for (k, share) in self.rrh_share.iter().enumerate() {
            for &(i, f) in share {
                load[i] += powers[k] * f;
            }
        }
        load
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfeasibleReason {
    /// The user's signal coefficient cannot beat its own estimation error.
    NonPositiveGain(usize),
    /// A single user's power exceeds what its serving RRHs can radiate.
    PowerCeiling(usize),
    /// An RRH exceeds its power cap.
    RrhCap(usize),
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PowerOutcome {
    Feasible {
        powers: Vec<f64>,
        iterations: usize,
    },
    Infeasible {
        reason: InfeasibleReason,
        last_iterate: Vec<f64>,
    },
}

/// Minimal powers meeting every SINR target, via the fixed point
/// `p_k <- gamma_k (sum_{j != k} p_j T_{j->k} + sigma^2) / (a_k - gamma_k s_k)`
/// started from zero. Iterates increase monotonically, so exceeding any cap
/// along the way proves infeasibility.
pub fn power_allocation_fixed_point(problem: &PowerProblem) -> PowerOutcome {
    let c = &problem.coupling;
    let n = c.len();
    let aim: Vec<f64> = problem.targets.iter().map(|g| g * (1.0 + TARGET_MARGIN)).collect();
    let mut gain = vec![0.0; n];
    for k in 0..n {
        gain[k] = c.signal[k] - aim[k] * c.self_error[k];
        if aim[k] > 0.0 && gain[k] <= 0.0 {
            return PowerOutcome::Infeasible {
                reason: InfeasibleReason::NonPositiveGain(k),
                last_iterate: vec![0.0; n],
            };
        }
    }

    let mut p = vec![0.0; n];
    let mut next = vec![0.0; n];
    for iteration in 1..=MAX_POWER_ITERATIONS {
        let mut change: f64 = 0.0;
        for k in 0..n {
            next[k] = if aim[k] == 0.0 {
                0.0
            } else {
                let interference: f64 = (0..n).filter(|&j| j != k).map(|j| p[j] * c.cross[k][j]).sum();
                aim[k] * (interference + problem.noise_power) / gain[k]
            };
            if next[k] > 0.0 {
                change = change.max((next[k] - p[k]).abs() / next[k]);
            }
        }
        std::mem::swap(&mut p, &mut next);

        for (k, share) in problem.rrh_share.iter().enumerate() {
            if p[k] > share.len() as f64 * problem.rrh_power_cap {
                return PowerOutcome::Infeasible {
                    reason: InfeasibleReason::PowerCeiling(k),
                    last_iterate: p,
                };
            }
        }
        if let Some(i) = problem.rrh_loads(&p).iter().position(|&l| l > problem.rrh_power_cap) {
            return PowerOutcome::Infeasible {
                reason: InfeasibleReason::RrhCap(i),
                last_iterate: p,
            };
        }
        if change < POWER_TOLERANCE {
            let sinr = c.sinr(&p, problem.noise_power);
            if sinr.iter().zip(&problem.targets).all(|(s, g)| s >= g) {
                return PowerOutcome::Feasible {
                    powers: p,
                    iterations: iteration,
                };
            }
        }
    }
    PowerOutcome::Infeasible {
        reason: InfeasibleReason::NotConverged,
        last_iterate: p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage2Params {
    pub rrh_power_cap: f64,
    pub noise_power: f64,
    pub fronthaul_cap: usize,
    pub sinr_target: f64,
    pub smoothing: SmoothingParams,
}

/// Everything the admission loop reads for one trial.
#[derive(Debug, Clone)]
pub struct Stage2Context<'a> {
    pub clusters: &'a [Vec<usize>],
    pub alpha: &'a LargeScale,
    pub state: &'a ChannelState,
    pub params: Stage2Params,
    /// Stage I interference scores, used to break removal ties.
    pub tie_scores: Vec<f64>,
}

/// Beams and powers for one candidate user set.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub serving: Vec<Vec<usize>>,
    /// Candidates that kept at least one serving RRH, ascending.
    pub served: Vec<usize>,
    /// Candidates left without any serving RRH.
    pub dropped: Vec<usize>,
    pub beams: Vec<Beam>,
    pub coupling: Coupling,
    pub power_problem: PowerProblem,
    pub outcome: PowerOutcome,
}

pub fn evaluate_set(ctx: &Stage2Context<'_>, candidates: &[usize]) -> Evaluation {
    let p = &ctx.params;
    let mut candidates = candidates.to_vec();
    candidates.sort_unstable();
    let serving = enforce_fronthaul_cap(ctx.clusters, &candidates, ctx.alpha, p.fronthaul_cap);
    let (served, dropped): (Vec<usize>, Vec<usize>) = candidates.iter().partition(|&&k| !serving[k].is_empty());
    let beams = robust_beam_direction(ctx.state, &serving, &served, p.noise_power);
    let coupling = rate_coupling(ctx.state, &served, &beams);
    let power_problem = PowerProblem::from_beams(
        coupling.clone(),
        &beams,
        vec![p.sinr_target; served.len()],
        p.noise_power,
        ctx.alpha.num_rrhs(),
        p.rrh_power_cap,
    );
    let outcome = power_allocation_fixed_point(&power_problem);
    Evaluation {
        serving,
        served,
        dropped,
        beams,
        coupling,
        power_problem,
        outcome,
    }
}

/// Final Stage II result.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissionSolution {
    pub served: Vec<usize>,
    /// Serving RRHs of every user id; empty for unserved users.
    pub serving_sets: Vec<Vec<usize>>,
    /// Beams aligned with `served`.
    pub beams: Vec<Beam>,
    pub powers: Vec<f64>,
    pub rates: Vec<f64>,
    pub per_rrh_power: Vec<f64>,
    /// Users removed, in removal order (re-admitted users excluded).
    pub removed: Vec<usize>,
    /// Smoothed count of users carried by each RRH's fronthaul link.
    pub fronthaul_scores: Vec<f64>,
}

impl AdmissionSolution {
    pub fn min_rate(&self) -> Option<f64> {
        self.rates.iter().copied().reduce(f64::min)
    }

    pub fn mean_rate(&self) -> Option<f64> {
        (!self.rates.is_empty()).then(|| self.rates.iter().sum::<f64>() / self.rates.len() as f64)
    }

    pub fn max_rrh_power(&self) -> f64 {
        self.per_rrh_power.iter().copied().fold(0.0, f64::max)
    }

    /// Users carried by each RRH.
    pub fn rrh_user_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.per_rrh_power.len()];
        for &k in &self.served {
            for &i in &self.serving_sets[k] {
                counts[i] += 1;
            }
        }
        counts
    }
}

fn solution_from(
    ctx: &Stage2Context<'_>,
    eval: Evaluation,
    powers: Vec<f64>,
    removed: Vec<usize>,
) -> AdmissionSolution {
    let p = &ctx.params;
    let rates = expected_rate_lb(&eval.coupling, &powers, p.noise_power);
    let per_rrh_power = eval.power_problem.rrh_loads(&powers);
    let mut fronthaul_scores = vec![0.0; ctx.alpha.num_rrhs()];
    for (kk, share) in eval.power_problem.rrh_share.iter().enumerate() {
        for &(i, f) in share {
            let x = powers[kk] * f / p.rrh_power_cap;
            fronthaul_scores[i] += smooth_indicator(x, p.smoothing).expect("powers are non-negative");
        }
    }
    let mut serving_sets = eval.serving;
    for (k, set) in serving_sets.iter_mut().enumerate() {
        if eval.served.binary_search(&k).is_err() {
            set.clear();
        }
    }
    AdmissionSolution {
        served: eval.served,
        serving_sets,
        beams: eval.beams,
        powers,
        rates,
        per_rrh_power,
        removed,
        fronthaul_scores,
    }
}

fn pick_victim(ctx: &Stage2Context<'_>, eval: &Evaluation, reason: InfeasibleReason, last: &[f64]) -> usize {
    if let InfeasibleReason::NonPositiveGain(kk) = reason {
        return eval.served[kk];
    }
    let cap = ctx.params.rrh_power_cap;
    let demand: Vec<f64> = eval
        .power_problem
        .rrh_share
        .iter()
        .enumerate()
        .map(|(kk, share)| share.iter().map(|&(_, f)| last[kk] * f / cap).fold(0.0, f64::max))
        .collect();
    let chosen = (0..eval.served.len())
        .max_by(|&a, &b| {
            let (ua, ub) = (eval.served[a], eval.served[b]);
            demand[a]
                .total_cmp(&demand[b])
                .then(ctx.tie_scores[ua].total_cmp(&ctx.tie_scores[ub]))
                .then(ub.cmp(&ua))
        })
        .expect("infeasible evaluation has users");
    eval.served[chosen]
}

/// Greedy admission over the Stage I survivors.
///
/// While the power stage is infeasible, the user with the largest power
/// demand relative to the RRH cap (at the last iterate) is removed; users
/// whose signal cannot beat their own estimation error go first. Once a
/// feasible set is reached, removed users are re-offered in reverse removal
/// order and kept whenever the enlarged set stays feasible.
pub fn admission_loop(ctx: &Stage2Context<'_>, survivors: &[usize]) -> AdmissionSolution {
    let mut current: Vec<usize> = survivors.to_vec();
    current.sort_unstable();
    let mut removed = Vec::new();

    let (mut eval, mut powers) = loop {
        let eval = evaluate_set(ctx, &current);
        if !eval.dropped.is_empty() {
            current.retain(|k| !eval.dropped.contains(k));
            removed.extend(eval.dropped.iter().copied());
        }
        match eval.outcome.clone() {
            PowerOutcome::Feasible { powers, .. } => break (eval, powers),
            PowerOutcome::Infeasible { reason, last_iterate } => {
                let victim = pick_victim(ctx, &eval, reason, &last_iterate);
                current.retain(|&k| k != victim);
                removed.push(victim);
            }
        }
    };

    for &candidate in removed.clone().iter().rev() {
        let mut trial = eval.served.clone();
        trial.push(candidate);
        let attempt = evaluate_set(ctx, &trial);
        if !attempt.dropped.is_empty() {
            continue;
        }
        if let PowerOutcome::Feasible { powers: p, .. } = &attempt.outcome {
            powers = p.clone();
            eval = attempt;
            removed.retain(|&k| k != candidate);
        }
    }

    solution_from(ctx, eval, powers, removed)
}
