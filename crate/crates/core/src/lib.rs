//! Simulation and optimization toolkit for user-centric ultra-dense C-RAN.
//!
//! The pipeline has two stages. Stage I selects users and allocates a fixed
//! budget of orthogonal pilots under a per-pilot reuse cap, using a
//! capacitated Dsatur coloring of the RRH-sharing conflict graph. Stage II
//! estimates intra-cluster channels from the (possibly contaminated) pilots
//! and admits users under rate, per-RRH power and fronthaul constraints with
//! robust beamforming.

pub mod channel;
pub mod coloring;
pub mod config;
pub mod conflict_graph;
pub mod error;
pub mod harness;
pub mod seed;
pub mod stage1;
pub mod stage2;
pub mod topology;

pub use config::{ClusterRule, SimConfig};
pub use error::{Error, Result};
pub use harness::{run_campaign, run_trial, Algorithm, CampaignReport, CampaignSpec, TrialResult};
