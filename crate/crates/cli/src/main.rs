use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ucran::harness::{run_trial_detailed, write_trials_csv};
use ucran::{run_campaign, Algorithm, CampaignSpec, ClusterRule, SimConfig};

#[derive(Parser, Debug)]
#[command(
    name = "ucran",
    version,
    about = "User-centric C-RAN pilot allocation and admission simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single trial and print its CSV row.
    Trial(TrialArgs),
    /// Run a Monte Carlo campaign over cluster sizes, pilot budgets and algorithms.
    Campaign(CampaignArgs),
}

#[derive(Args, Debug)]
struct TrialArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "Proposed")]
    algorithm: Algorithm,
    /// Trial index; the trial seed is master_seed + index.
    #[arg(long, default_value_t = 0)]
    trial_index: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_delimiter = ',', default_value = "Proposed,Ortho,NoCaseII,Con,Perfect")]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 100)]
    seeds: usize,
    #[arg(long = "cluster-sizes", value_delimiter = ',', default_value = "2,3,4,5,6")]
    cluster_sizes: Vec<usize>,
    #[arg(long = "pilot-counts", value_delimiter = ',', default_value = "4,8")]
    pilot_counts: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Every simulation parameter; flags override values from `--config`.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// TOML file with any subset of the parameters below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    area_side_m: Option<f64>,
    #[arg(long)]
    num_rrhs: Option<usize>,
    #[arg(long)]
    num_users: Option<usize>,
    #[arg(long)]
    cluster_size: Option<usize>,
    #[arg(long)]
    antennas_per_rrh: Option<usize>,
    #[arg(long)]
    pilot_count: Option<usize>,
    #[arg(long)]
    reuse_cap: Option<usize>,
    #[arg(long)]
    rrh_power_cap_mw: Option<f64>,
    #[arg(long)]
    pilot_power_mw: Option<f64>,
    #[arg(long)]
    noise_power_mw: Option<f64>,
    #[arg(long)]
    rate_req: Option<f64>,
    #[arg(long)]
    fronthaul_cap: Option<usize>,
    #[arg(long)]
    pathloss_intercept_db: Option<f64>,
    #[arg(long)]
    pathloss_slope_db: Option<f64>,
    #[arg(long)]
    min_distance_m: Option<f64>,
    #[arg(long)]
    shadowing_stddev_db: Option<f64>,
    #[arg(long, value_parser = parse_rule)]
    cluster_rule: Option<ClusterRule>,
    #[arg(long)]
    smoothing_theta: Option<f64>,
    #[arg(long)]
    master_seed: Option<u64>,
}

fn parse_rule(s: &str) -> std::result::Result<ClusterRule, String> {
    match s {
        "distance" => Ok(ClusterRule::Distance),
        "gain" => Ok(ClusterRule::Gain),
        other => Err(format!("unknown cluster rule {other:?} (expected distance or gain)")),
    }
}

macro_rules! override_fields {
    ($args:expr, $cfg:expr, $($field:ident),* $(,)?) => {
        $(if let Some(v) = $args.$field { $cfg.$field = v; })*
    };
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::from_file(path)?,
            None => SimConfig::default(),
        };
        override_fields!(
            self,
            cfg,
            area_side_m,
            num_rrhs,
            num_users,
            cluster_size,
            antennas_per_rrh,
            pilot_count,
            reuse_cap,
            rrh_power_cap_mw,
            pilot_power_mw,
            noise_power_mw,
            rate_req,
            fronthaul_cap,
            pathloss_intercept_db,
            pathloss_slope_db,
            min_distance_m,
            shadowing_stddev_db,
            cluster_rule,
            smoothing_theta,
            master_seed,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_single(args: TrialArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let seed = ucran::seed::trial_seed(config.master_seed, args.trial_index);
    let outcome = run_trial_detailed(&config, seed, args.algorithm)?;
    let r = &outcome.result;

    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_trials_csv(std::slice::from_ref(r), file).with_context(|| format!("writing {}", path.display()))?;
        }
        None => write_trials_csv(std::slice::from_ref(r), std::io::stdout().lock())?,
    }

    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "seed {seed}: {} admitted in Stage I ({}; {} pilots), {} served in Stage II ({} removed)",
        r.stage1_admitted,
        r.case_taken.as_str(),
        r.colors_used,
        r.stage2_served,
        r.stage2_removed
    )?;
    if let Some(th) = r.threshold {
        writeln!(err, "interference threshold {th:.6}")?;
    }
    let scores: Vec<String> = outcome
        .solution
        .fronthaul_scores
        .iter()
        .map(|s| format!("{s:.3}"))
        .collect();
    writeln!(err, "smoothed fronthaul load per RRH: [{}]", scores.join(", "))?;
    writeln!(
        err,
        "runtime: stage1 {:.2} ms, stage2 {:.2} ms",
        r.stage1_ms, r.stage2_ms
    )?;
    Ok(())
}

fn run_grid(args: CampaignArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let spec = CampaignSpec {
        cluster_sizes: args.cluster_sizes,
        pilot_counts: args.pilot_counts,
        algorithms: args.algorithms,
        num_seeds: args.seeds,
    };
    let report = run_campaign(&config, &spec)?;
    report.write_csv_file(&args.out)?;

    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "{:<9} {:>3} {:>4} {:>16} {:>16}",
        "algorithm", "L", "tau", "stage1 (ci95)", "stage2 (ci95)"
    )?;
    for c in &report.cells {
        writeln!(
            err,
            "{:<9} {:>3} {:>4} {:>8.3} ({:.3}) {:>8.3} ({:.3})",
            c.algorithm.as_str(),
            c.cluster_size,
            c.pilots,
            c.admitted.mean,
            c.admitted.ci95,
            c.served.mean,
            c.served.ci95
        )?;
    }
    writeln!(err, "wrote {} trials to {}", report.trials.len(), args.out.display())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Trial(args) => run_single(args),
        Command::Campaign(args) => run_grid(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
