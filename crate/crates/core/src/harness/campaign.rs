//! Monte Carlo campaigns over a grid of cluster sizes, pilot budgets and
//! algorithms. Every cell runs the same seed list, `master_seed + i`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::{run_trial, Algorithm, TrialResult};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::seed::trial_seed;

pub const CSV_HEADER: [&str; 11] = [
    "algorithm",
    "L",
    "tau",
    "seed",
    "stage1_admitted",
    "stage2_served",
    "min_rate",
    "mean_rate",
    "max_rrh_power_mw",
    "case_taken",
    "colors_used",
];

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub cluster_sizes: Vec<usize>,
    pub pilot_counts: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub num_seeds: usize,
}

impl CampaignSpec {
    pub fn seeds(&self, config: &SimConfig) -> Vec<u64> {
        (0..self.num_seeds as u64)
            .map(|i| trial_seed(config.master_seed, i))
            .collect()
    }
}

/// Mean, sample standard deviation and 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stddev: f64,
    pub ci95: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stddev: f64::NAN,
                ci95: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stddev,
            ci95: 1.96 * stddev / (n as f64).sqrt(),
            count: n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub algorithm: Algorithm,
    pub cluster_size: usize,
    pub pilots: usize,
    pub admitted: Summary,
    pub served: Summary,
    pub min_rate: Summary,
    pub mean_rate: Summary,
    pub max_rrh_power: Summary,
    pub colors_used: Summary,
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub seeds: Vec<u64>,
    /// Trials in grid order: pilot count, cluster size, algorithm, seed.
    pub trials: Vec<TrialResult>,
    pub cells: Vec<CellSummary>,
}

impl CampaignReport {
    pub fn cell(&self, algorithm: Algorithm, cluster_size: usize, pilots: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.cluster_size == cluster_size && c.pilots == pilots)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for t in &self.trials {
            w.write_record(trial_record(t))?;
        }
        for cell in &self.cells {
            for (label, pick) in [
                ("mean", (|s: &Summary| s.mean) as fn(&Summary) -> f64),
                ("stddev", |s: &Summary| s.stddev),
                ("ci95", |s: &Summary| s.ci95),
            ] {
                w.write_record([
                    cell.algorithm.as_str().to_string(),
                    cell.cluster_size.to_string(),
                    cell.pilots.to_string(),
                    label.to_string(),
                    fmt_stat(pick(&cell.admitted)),
                    fmt_stat(pick(&cell.served)),
                    fmt_stat(pick(&cell.min_rate)),
                    fmt_stat(pick(&cell.mean_rate)),
                    fmt_stat(pick(&cell.max_rrh_power)),
                    String::new(),
                    fmt_stat(pick(&cell.colors_used)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })
    }
}

fn fmt_stat(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(crate) fn trial_record(t: &TrialResult) -> [String; 11] {
    [
        t.algorithm.as_str().to_string(),
        t.cluster_size.to_string(),
        t.pilots.to_string(),
        t.seed.to_string(),
        t.stage1_admitted.to_string(),
        t.stage2_served.to_string(),
        fmt_opt(t.min_rate),
        fmt_opt(t.mean_rate),
        t.max_rrh_power_mw.to_string(),
        t.case_taken.as_str().to_string(),
        t.colors_used.to_string(),
    ]
}

/// Writes one CSV header line and one row per trial.
pub fn write_trials_csv<W: Write>(trials: &[TrialResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for t in trials {
        w.write_record(trial_record(t))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every `(tau, L, algorithm, seed)` combination in parallel and
/// reduces in grid order, so the output does not depend on scheduling.
pub fn run_campaign(config: &SimConfig, spec: &CampaignSpec) -> Result<CampaignReport> {
    if spec.num_seeds == 0 {
        return Err(Error::InvalidConfig("campaign needs at least one seed".into()));
    }
    let seeds = spec.seeds(config);
    let mut jobs = Vec::new();
    for &tau in &spec.pilot_counts {
        for &l in &spec.cluster_sizes {
            let cell_config = SimConfig {
                cluster_size: l,
                pilot_count: tau,
                ..config.clone()
            };
            cell_config.validate()?;
            for &alg in &spec.algorithms {
                for &seed in &seeds {
                    jobs.push((cell_config.clone(), alg, seed));
                }
            }
        }
    }
    let trials: Vec<TrialResult> = jobs
        .par_iter()
        .map(|(c, alg, seed)| run_trial(c, *seed, *alg))
        .collect::<Result<_>>()?;

    let cells = trials
        .chunks(seeds.len())
        .map(|chunk| {
            let first = &chunk[0];
            let col = |f: &dyn Fn(&TrialResult) -> Option<f64>| -> Summary {
                Summary::of(&chunk.iter().filter_map(f).collect::<Vec<_>>())
            };
            CellSummary {
                algorithm: first.algorithm,
                cluster_size: first.cluster_size,
                pilots: first.pilots,
                admitted: col(&|t| Some(t.stage1_admitted as f64)),
                served: col(&|t| Some(t.stage2_served as f64)),
                min_rate: col(&|t| t.min_rate),
                mean_rate: col(&|t| t.mean_rate),
                max_rrh_power: col(&|t| Some(t.max_rrh_power_mw)),
                colors_used: col(&|t| Some(t.colors_used as f64)),
            }
        })
        .collect();
    Ok(CampaignReport { seeds, trials, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.stddev - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.ci95 - 1.96 * s.stddev / 2.0).abs() < 1e-12);
        assert_eq!(Summary::of(&[7.0]).stddev, 0.0);
        assert!(Summary::of(&[]).mean.is_nan());
    }

    #[test]
    fn zero_seeds_rejected() {
        let spec = CampaignSpec {
            cluster_sizes: vec![2],
            pilot_counts: vec![4],
            algorithms: vec![Algorithm::Ortho],
            num_seeds: 0,
        };
        assert!(run_campaign(&SimConfig::default(), &spec).is_err());
    }

    #[test]
    fn small_campaign_layout_and_determinism() {
        let spec = CampaignSpec {
            cluster_sizes: vec![2, 3],
            pilot_counts: vec![4],
            algorithms: vec![Algorithm::Proposed, Algorithm::Ortho],
            num_seeds: 3,
        };
        let config = SimConfig::default();
        let a = run_campaign(&config, &spec).unwrap();
        assert_eq!(a.trials.len(), 2 * 2 * 3);
        assert_eq!(a.cells.len(), 4);
        let ortho = a.cell(Algorithm::Ortho, 3, 4).unwrap();
        assert_eq!(ortho.admitted.mean, 4.0);
        assert_eq!(ortho.admitted.stddev, 0.0);

        let mut buf_a = Vec::new();
        a.write_csv(&mut buf_a).unwrap();
        let b = run_campaign(&config, &spec).unwrap();
        let mut buf_b = Vec::new();
        b.write_csv(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);

        let text = String::from_utf8(buf_a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 1 + 12 + 4 * 3);
        assert!(text.lines().any(|l| l.starts_with("Ortho,3,4,mean,4,")));
    }
}
