//! End-to-end trials: topology, Stage I (proposed or a baseline), channel
//! estimation and Stage II admission.

mod baselines;
mod campaign;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

pub use baselines::{baseline_con, baseline_nocase2, baseline_ortho};
pub use campaign::{run_campaign, write_trials_csv, CampaignReport, CampaignSpec, CellSummary, Summary, CSV_HEADER};

use crate::channel::{
    check_pilot_separation, draw_channels, mmse_estimate, perfect_csi, simulate_pilot_rx, ChannelState,
};
use crate::config::SimConfig;
use crate::conflict_graph::interference_score;
use crate::error::{Error, Result};
use crate::seed::{stream_rng, Stream};
use crate::stage1::{run_stage1, Case, PilotProblem, Stage1Result};
use crate::stage2::{admission_loop, AdmissionSolution, SmoothingParams, Stage2Context, Stage2Params};
use crate::topology::NetworkInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Algorithm {
    Proposed,
    Ortho,
    NoCaseII,
    Con,
    Perfect,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Proposed,
        Algorithm::Ortho,
        Algorithm::NoCaseII,
        Algorithm::Con,
        Algorithm::Perfect,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Proposed => "Proposed",
            Algorithm::Ortho => "Ortho",
            Algorithm::NoCaseII => "NoCaseII",
            Algorithm::Con => "Con",
            Algorithm::Perfect => "Perfect",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// One row of the campaign output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub cluster_size: usize,
    pub pilots: usize,
    pub seed: u64,
    pub stage1_admitted: usize,
    pub stage2_served: usize,
    pub min_rate: Option<f64>,
    pub mean_rate: Option<f64>,
    pub max_rrh_power_mw: f64,
    pub case_taken: Case,
    pub colors_used: usize,
    pub threshold: Option<f64>,
    pub stage2_removed: usize,
    pub stage1_ms: f64,
    pub stage2_ms: f64,
}

/// A trial with every intermediate product kept.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub result: TrialResult,
    pub instance: NetworkInstance,
    pub stage1: Stage1Result,
    pub state: ChannelState,
    pub solution: AdmissionSolution,
    pub params: Stage2Params,
}

pub fn stage2_params(config: &SimConfig) -> Stage2Params {
    Stage2Params {
        rrh_power_cap: config.rrh_power_cap_mw,
        noise_power: config.noise_power_mw,
        fronthaul_cap: config.fronthaul_cap,
        sinr_target: config.sinr_target(),
        smoothing: SmoothingParams {
            theta: config.smoothing_theta,
        },
    }
}

/// Runs one trial and returns the CSV-level summary.
pub fn run_trial(config: &SimConfig, seed: u64, algorithm: Algorithm) -> Result<TrialResult> {
    run_trial_detailed(config, seed, algorithm).map(|o| o.result)
}

pub fn run_trial_detailed(config: &SimConfig, seed: u64, algorithm: Algorithm) -> Result<TrialOutcome> {
    config.validate()?;
    let instance = NetworkInstance::generate(config, seed);
    let (tau, cap) = (config.pilot_count, config.reuse_cap);

    let t0 = Instant::now();
    let problem = PilotProblem::new(&instance);
    let mut baseline_rng = stream_rng(seed, Stream::Baseline);
    let stage1 = match algorithm {
        Algorithm::Proposed | Algorithm::Perfect => run_stage1(&problem, tau, cap),
        Algorithm::Ortho => baseline_ortho(&problem, tau, cap, &mut baseline_rng),
        Algorithm::NoCaseII => baseline_nocase2(&problem, tau, cap),
        Algorithm::Con => baseline_con(&problem, tau, cap, &mut baseline_rng),
    };
    let stage1_ms = t0.elapsed().as_secs_f64() * 1e3;
    if let Err((a, b)) = check_pilot_separation(&instance.clusters, &stage1.assignment) {
        panic!("users {a} and {b} share an RRH and a pilot after Stage I");
    }

    let t1 = Instant::now();
    let channels = draw_channels(&instance.alpha, config.antennas_per_rrh, seed);
    let state = match algorithm {
        Algorithm::Perfect => perfect_csi(channels, &instance.alpha, &instance.clusters, &stage1.admitted),
        _ => {
            let y = simulate_pilot_rx(
                &channels,
                &stage1.assignment,
                tau,
                config.pilot_power_mw,
                config.noise_power_mw,
                seed,
            );
            mmse_estimate(
                channels,
                &y,
                &instance.alpha,
                &instance.clusters,
                &stage1.assignment,
                config.pilot_power_mw,
                config.noise_power_mw,
            )
        }
    };
    let tie_scores = (0..instance.num_users())
        .map(|k| interference_score(&problem.eta, &stage1.assignment, k).unwrap_or(0.0))
        .collect();
    let params = stage2_params(config);
    let ctx = Stage2Context {
        clusters: &instance.clusters,
        alpha: &instance.alpha,
        state: &state,
        params,
        tie_scores,
    };
    let solution = admission_loop(&ctx, &stage1.admitted);
    let stage2_ms = t1.elapsed().as_secs_f64() * 1e3;

    let result = TrialResult {
        algorithm,
        cluster_size: config.cluster_size,
        pilots: tau,
        seed,
        stage1_admitted: stage1.admitted.len(),
        stage2_served: solution.served.len(),
        min_rate: solution.min_rate(),
        mean_rate: solution.mean_rate(),
        max_rrh_power_mw: solution.max_rrh_power(),
        case_taken: stage1.case_taken,
        colors_used: stage1.colors_used(),
        threshold: stage1.threshold,
        stage2_removed: solution.removed.len(),
        stage1_ms,
        stage2_ms,
    };
    Ok(TrialOutcome {
        result,
        instance,
        stage1,
        state,
        solution,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("nocaseii".parse::<Algorithm>().unwrap(), Algorithm::NoCaseII);
        assert!("wmmse".parse::<Algorithm>().is_err());
    }

    #[test]
    fn proposed_counts_in_range() {
        let c = SimConfig::default();
        let r = run_trial(&c, 4, Algorithm::Proposed).unwrap();
        assert!(r.stage2_served <= r.stage1_admitted && r.stage1_admitted <= 24);
    }

    #[test]
    fn ortho_admits_tau() {
        let c = SimConfig {
            pilot_count: 8,
            ..SimConfig::default()
        };
        for seed in 0..3 {
            let r = run_trial(&c, seed, Algorithm::Ortho).unwrap();
            assert_eq!(r.stage1_admitted, 8);
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let c = SimConfig::default();
        for a in Algorithm::ALL {
            let x = run_trial(&c, 17, a).unwrap();
            let y = run_trial(&c, 17, a).unwrap();
            assert_eq!(
                (x.stage1_admitted, x.stage2_served, x.min_rate, x.max_rrh_power_mw),
                (y.stage1_admitted, y.stage2_served, y.min_rate, y.max_rrh_power_mw)
            );
        }
    }

    #[test]
    fn invalid_config_propagates() {
        let c = SimConfig {
            reuse_cap: 0,
            ..SimConfig::default()
        };
        assert!(matches!(
            run_trial(&c, 0, Algorithm::Proposed),
            Err(Error::InvalidConfig(_))
        ));
    }
}
