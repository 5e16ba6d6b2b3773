//! Network placement, large-scale fading and user-centric candidate clusters.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::config::{ClusterRule, SimConfig};
use crate::seed::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Positions {
    pub rrhs: Vec<Point>,
    pub users: Vec<Point>,
}

/// Linear large-scale power gains, indexed `(rrh, user)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScale {
    num_rrhs: usize,
    num_users: usize,
    gains: Vec<f64>,
}

impl LargeScale {
    pub fn from_fn(num_rrhs: usize, num_users: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut gains = Vec::with_capacity(num_rrhs * num_users);
        for i in 0..num_rrhs {
            for k in 0..num_users {
                gains.push(f(i, k));
            }
        }
        Self {
            num_rrhs,
            num_users,
            gains,
        }
    }

    #[inline]
    pub fn get(&self, rrh: usize, user: usize) -> f64 {
        self.gains[rrh * self.num_users + user]
    }

    pub fn num_rrhs(&self) -> usize {
        self.num_rrhs
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// Multiplies every gain by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            num_rrhs: self.num_rrhs,
            num_users: self.num_users,
            gains: self.gains.iter().map(|g| g * factor).collect(),
        }
    }

    /// Sum of user `k`'s gains over a set of RRHs.
    pub fn sum_over(&self, rrhs: &[usize], user: usize) -> f64 {
        rrhs.iter().map(|&i| self.get(i, user)).sum()
    }
}

/// A generated deployment. Immutable once built.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    pub positions: Positions,
    pub alpha: LargeScale,
    /// Candidate RRH set of each user, ordered by preference.
    pub clusters: Vec<Vec<usize>>,
}

impl NetworkInstance {
    /// Places nodes, draws shadowing and forms clusters for one trial seed.
    pub fn generate(config: &SimConfig, seed: u64) -> Self {
        let positions = generate_topology(config, seed);
        let alpha = compute_large_scale(&positions, config, seed);
        let clusters = build_clusters(&positions, &alpha, config.cluster_size, config.cluster_rule);
        Self {
            positions,
            alpha,
            clusters,
        }
    }

    pub fn num_rrhs(&self) -> usize {
        self.alpha.num_rrhs()
    }

    pub fn num_users(&self) -> usize {
        self.alpha.num_users()
    }

    pub fn in_cluster(&self, rrh: usize, user: usize) -> bool {
        self.clusters[user].contains(&rrh)
    }
}

/// Uniform i.i.d. placement of RRHs and users over the square.
pub fn generate_topology(config: &SimConfig, seed: u64) -> Positions {
    let mut rng = stream_rng(seed, Stream::Placement);
    let side = config.area_side_m;
    let mut draw = |n: usize| -> Vec<Point> {
        (0..n)
            .map(|_| Point::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side)))
            .collect()
    };
    let rrhs = draw(config.num_rrhs);
    let users = draw(config.num_users);
    Positions { rrhs, users }
}

/// Path loss in dB at distance `d` metres, clamped below at `min_distance_m`.
pub fn path_loss_db(distance_m: f64, config: &SimConfig) -> f64 {
    let d = distance_m.max(config.min_distance_m);
    config.pathloss_intercept_db + config.pathloss_slope_db * (d / 1000.0).log10()
}

pub fn compute_large_scale(positions: &Positions, config: &SimConfig, seed: u64) -> LargeScale {
    let mut rng = stream_rng(seed, Stream::Shadowing);
    let shadow = Normal::new(0.0, config.shadowing_stddev_db).expect("validated stddev");
    LargeScale::from_fn(positions.rrhs.len(), positions.users.len(), |i, k| {
        let d = positions.rrhs[i].distance(&positions.users[k]);
        let db = -path_loss_db(d, config) + shadow.sample(&mut rng);
        10f64.powf(db / 10.0)
    })
}

/// The `L` preferred RRHs of every user. Ties go to the lower RRH index.
pub fn build_clusters(
    positions: &Positions,
    alpha: &LargeScale,
    cluster_size: usize,
    rule: ClusterRule,
) -> Vec<Vec<usize>> {
    (0..positions.users.len())
        .map(|k| {
            let mut order: Vec<usize> = (0..positions.rrhs.len()).collect();
            match rule {
                ClusterRule::Distance => {
                    let user = positions.users[k];
                    order.sort_by(|&a, &b| {
                        let da = positions.rrhs[a].distance(&user);
                        let db = positions.rrhs[b].distance(&user);
                        da.total_cmp(&db).then(a.cmp(&b))
                    });
                }
                ClusterRule::Gain => {
                    order.sort_by(|&a, &b| alpha.get(b, k).total_cmp(&alpha.get(a, k)).then(a.cmp(&b)));
                }
            }
            order.truncate(cluster_size);
            order
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_shadow() -> SimConfig {
        SimConfig {
            shadowing_stddev_db: 0.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn placement_inside_square() {
        let c = SimConfig::default();
        let p = generate_topology(&c, 3);
        assert_eq!(p.rrhs.len(), 36);
        assert_eq!(p.users.len(), 24);
        for pt in p.rrhs.iter().chain(&p.users) {
            assert!((0.0..=700.0).contains(&pt.x) && (0.0..=700.0).contains(&pt.y));
        }
    }

    #[test]
    fn single_node_placement() {
        let c = SimConfig {
            num_rrhs: 1,
            num_users: 1,
            cluster_size: 1,
            ..SimConfig::default()
        };
        for seed in 0..20 {
            let inst = NetworkInstance::generate(&c, seed);
            assert_eq!(inst.positions.rrhs.len(), 1);
            assert_eq!(inst.clusters, vec![vec![0]]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let c = SimConfig::default();
        let a = NetworkInstance::generate(&c, 11);
        let b = NetworkInstance::generate(&c, 11);
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.clusters, b.clusters);
        let other = NetworkInstance::generate(&c, 12);
        assert_ne!(a.positions, other.positions);
    }

    #[test]
    fn reference_distance_path_loss() {
        let c = no_shadow();
        let p = Positions {
            rrhs: vec![Point::new(0.0, 0.0)],
            users: vec![Point::new(1000.0, 0.0)],
        };
        let a = compute_large_scale(&p, &c, 0);
        assert!((path_loss_db(1000.0, &c) - 128.1).abs() < 1e-12);
        assert!((a.get(0, 0) / 10f64.powf(-12.81) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_distances_clamped() {
        let c = no_shadow();
        assert_eq!(path_loss_db(0.0, &c), path_loss_db(1.0, &c));
        assert_eq!(path_loss_db(0.3, &c), path_loss_db(1.0, &c));
        assert!(path_loss_db(2.0, &c) > path_loss_db(1.0, &c));
    }

    #[test]
    fn gains_positive_and_finite() {
        let c = SimConfig::default();
        for seed in 0..10 {
            let inst = NetworkInstance::generate(&c, seed);
            for i in 0..36 {
                for k in 0..24 {
                    let g = inst.alpha.get(i, k);
                    assert!(g > 0.0 && g.is_finite());
                }
            }
        }
    }

    #[test]
    fn shadowing_spread_matches_stddev() {
        // All users at the same distance, so 10 log10(alpha) differs only by shadowing.
        let c = SimConfig::default();
        let n = 100_000;
        let p = Positions {
            rrhs: vec![Point::new(0.0, 0.0)],
            users: vec![Point::new(100.0, 0.0); n],
        };
        let a = compute_large_scale(&p, &c, 5);
        let db: Vec<f64> = (0..n).map(|k| 10.0 * a.get(0, k).log10()).collect();
        let mean = db.iter().sum::<f64>() / n as f64;
        let var = db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 8.0).abs() < 0.2, "stddev {}", var.sqrt());
    }

    #[test]
    fn full_cluster_when_l_equals_i() {
        let c = SimConfig {
            num_rrhs: 5,
            num_users: 3,
            cluster_size: 5,
            ..SimConfig::default()
        };
        let inst = NetworkInstance::generate(&c, 1);
        for cl in &inst.clusters {
            let mut s = cl.clone();
            s.sort();
            assert_eq!(s, vec![0, 1, 2, 3, 4]);
        }
    }

    #[test]
    fn nearest_and_tie_rules() {
        let c = no_shadow();
        let p = Positions {
            rrhs: vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0), Point::new(200.0, 0.0)],
            users: vec![Point::new(10.0, 0.0), Point::new(150.0, 0.0)],
        };
        let a = compute_large_scale(&p, &c, 0);
        let cl = build_clusters(&p, &a, 2, ClusterRule::Distance);
        assert_eq!(cl[0], vec![0, 1]);
        // user 1 is equidistant from RRH 1 and RRH 2
        assert_eq!(cl[1], vec![1, 2]);
        let cl1 = build_clusters(&p, &a, 1, ClusterRule::Distance);
        assert_eq!(cl1[1], vec![1]);
    }

    #[test]
    fn gain_rule_follows_shadowing() {
        let p = Positions {
            rrhs: vec![Point::new(0.0, 0.0), Point::new(100.0, 0.0)],
            users: vec![Point::new(10.0, 0.0)],
        };
        let alpha = LargeScale::from_fn(2, 1, |i, _| if i == 0 { 1e-12 } else { 1e-9 });
        assert_eq!(build_clusters(&p, &alpha, 1, ClusterRule::Gain)[0], vec![1]);
        assert_eq!(build_clusters(&p, &alpha, 1, ClusterRule::Distance)[0], vec![0]);
    }
}
