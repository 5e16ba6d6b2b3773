//! Simulation parameters.
//!
//! Defaults reproduce the dense deployment used throughout the crate: a
//! 700 m square with 36 RRHs and 24 users, 100 mW per RRH, 200 mW pilots,
//! a reuse cap of four users per pilot, a 4 bit/s/Hz rate target and a
//! wireless fronthaul that carries at most three users per link. Radio
//! propagation parameters (path loss, shadowing, noise, antenna count) are
//! modelling choices and can all be overridden.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the candidate cluster of a user is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClusterRule {
    /// Nearest RRHs by Euclidean distance.
    #[default]
    Distance,
    /// Strongest RRHs by large-scale gain (distance plus shadowing).
    Gain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub area_side_m: f64,
    pub num_rrhs: usize,
    pub num_users: usize,
    /// Candidate cluster size `L`.
    pub cluster_size: usize,
    pub antennas_per_rrh: usize,
    /// Number of orthogonal pilots `tau`.
    pub pilot_count: usize,
    /// Maximum number of users sharing one pilot.
    pub reuse_cap: usize,
    pub rrh_power_cap_mw: f64,
    pub pilot_power_mw: f64,
    pub noise_power_mw: f64,
    /// Minimum rate per served user, bit/s/Hz.
    pub rate_req: f64,
    /// Users per fronthaul link.
    pub fronthaul_cap: usize,
    /// Path loss at 1 km, dB.
    pub pathloss_intercept_db: f64,
    /// Path loss slope, dB per decade of distance.
    pub pathloss_slope_db: f64,
    pub min_distance_m: f64,
    pub shadowing_stddev_db: f64,
    pub cluster_rule: ClusterRule,
    /// Smoothing constant of the fronthaul indicator surrogate.
    pub smoothing_theta: f64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            area_side_m: 700.0,
            num_rrhs: 36,
            num_users: 24,
            cluster_size: 4,
            antennas_per_rrh: 2,
            pilot_count: 4,
            reuse_cap: 4,
            rrh_power_cap_mw: 100.0,
            pilot_power_mw: 200.0,
            // -104 dBm
            noise_power_mw: 10f64.powf(-10.4),
            rate_req: 4.0,
            fronthaul_cap: 3,
            pathloss_intercept_db: 128.1,
            pathloss_slope_db: 37.6,
            min_distance_m: 1.0,
            shadowing_stddev_db: 8.0,
            cluster_rule: ClusterRule::Distance,
            smoothing_theta: 1e-3,
            master_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a TOML key-value file. Missing keys keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config = Self::from_toml_str(&text).map_err(|source| Error::ConfigParse {
            path: path.to_path_buf(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_rrhs", self.num_rrhs),
            ("num_users", self.num_users),
            ("cluster_size", self.cluster_size),
            ("antennas_per_rrh", self.antennas_per_rrh),
            ("pilot_count", self.pilot_count),
            ("reuse_cap", self.reuse_cap),
            ("fronthaul_cap", self.fronthaul_cap),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.cluster_size > self.num_rrhs {
            return Err(Error::InvalidConfig(format!(
                "cluster_size {} exceeds num_rrhs {}",
                self.cluster_size, self.num_rrhs
            )));
        }
        let positives = [
            ("area_side_m", self.area_side_m),
            ("rrh_power_cap_mw", self.rrh_power_cap_mw),
            ("pilot_power_mw", self.pilot_power_mw),
            ("noise_power_mw", self.noise_power_mw),
            ("min_distance_m", self.min_distance_m),
            ("smoothing_theta", self.smoothing_theta),
        ];
        for (name, value) in positives {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.rate_req.is_finite() && self.rate_req >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rate_req must be non-negative, got {}",
                self.rate_req
            )));
        }
        if !(self.shadowing_stddev_db.is_finite() && self.shadowing_stddev_db >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "shadowing_stddev_db must be non-negative, got {}",
                self.shadowing_stddev_db
            )));
        }
        if !self.pathloss_intercept_db.is_finite() || !self.pathloss_slope_db.is_finite() {
            return Err(Error::InvalidConfig("path loss parameters must be finite".into()));
        }
        Ok(())
    }

    /// SINR target matching the rate requirement.
    pub fn sinr_target(&self) -> f64 {
        2f64.powf(self.rate_req) - 1.0
    }
}
