//! Command-line front end: `cluster`, `select`, `simulate`, `bench` and
//! `evaluate`.
//!
//! Every command writes `report.json` (last, so its presence means success)
//! plus CSV files into the output directory. All sub-seeds derive from
//! `--seed`, and reports carry no wall-clock data unless `--timing` is set,
//! so repeated runs produce identical files.

pub mod bench;
mod commands;
pub mod config;
pub mod io;
mod project;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::geomedian::{AsgConfig, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::kmedians::{
    Algorithm, ClusterParams, InitMethod, DEFAULT_GINI_THRESHOLD, DEFAULT_LLOYD_MAX_ITER,
    DEFAULT_N_START,
};
use crate::selection::{SelectionMethod, SilhouetteMetric, DEFAULT_GAP_REFERENCES};
use crate::simulation::{ContaminationSpec, NoiseLaw, Scenario};

pub use commands::prepare_data;
pub use config::{
    BenchConfig, BenchSizes, ClusteringRun, CommandConfig, DataSource, DataSpec, EvaluateConfig,
    ModelChoice, RunConfig, RunReport, Timing,
};
pub use project::principal_scores;

/// Contamination levels of the reference protocol.
pub const REFERENCE_RHOS: [f64; 9] = [0.0, 0.01, 0.02, 0.03, 0.05, 0.09, 0.16, 0.28, 0.5];
pub const DEFAULT_K_MAX: usize = 20;
pub const DESK_TRIALS: usize = 20;
pub const FULL_TRIALS: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "kmedians", version, about = "Robust K-medians clustering with data-driven choice of k")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster with a fixed number of clusters.
    Cluster(ClusterArgs),
    /// Choose the number of clusters, then cluster.
    Select(SelectArgs),
    /// Write a synthetic (optionally contaminated) data set.
    Simulate(SimulateArgs),
    /// Repeated trials over scenarios, contamination levels and algorithms.
    Bench(BenchArgs),
    /// Score predicted labels (and centers) against the truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Master seed; every random stream derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "kmedians-out")]
    pub out: PathBuf,
    /// Repeat a run from a config file or a previous report.json (other
    /// run options are ignored).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record wall-clock time in the report (makes reports differ between runs).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV data file with a header row; `label` and `contaminated` columns are optional.
    #[arg(long, conflicts_with = "scenario")]
    pub input: Option<PathBuf>,
    /// Synthetic scenario: s1, s2, s3 or sphere10.
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// Points per cluster for a scenario (total points for s1).
    #[arg(long)]
    pub per_cluster: Option<usize>,
    /// Fraction of points replaced by noise, in [0, 0.5].
    #[arg(long)]
    pub rho: Option<f64>,
    /// Noise law: t1, t2 (any tN) or uniform (on [-10, 10]).
    #[arg(long, default_value = "t1", value_parser = parse_law)]
    pub law: NoiseLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InitKind {
    /// Gini-guarded single linkage, cut at k.
    Hierarchy,
    /// Distance-weighted random seeding.
    PlusPlusL1,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Initial centers.
    #[arg(long, value_enum, default_value = "hierarchy")]
    pub init: InitKind,
    #[arg(long, default_value_t = DEFAULT_GINI_THRESHOLD)]
    pub gini_threshold: f64,
    /// Lloyd iteration cap.
    #[arg(long, default_value_t = DEFAULT_LLOYD_MAX_ITER)]
    pub max_iter: usize,
    /// Restarts of the Lloyd-style algorithms.
    #[arg(long, default_value_t = DEFAULT_N_START)]
    pub n_start: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub weiszfeld_tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub weiszfeld_max_iter: usize,
    /// Step constant of the stochastic gradient.
    #[arg(long, default_value_t = 1.0)]
    pub asg_c_gamma: f64,
    /// Step exponent of the stochastic gradient, in (0.5, 1).
    #[arg(long, default_value_t = 0.75)]
    pub asg_alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub asg_passes: usize,
}

impl ParamArgs {
    fn params(&self) -> ClusterParams {
        ClusterParams {
            init: match self.init {
                InitKind::Hierarchy => InitMethod::RobustHierarchical {
                    gini_threshold: self.gini_threshold,
                },
                InitKind::PlusPlusL1 => InitMethod::PlusPlusL1,
            },
            max_iter: self.max_iter,
            n_start: self.n_start,
            weiszfeld_tol: self.weiszfeld_tol,
            weiszfeld_max_iter: self.weiszfeld_max_iter,
            asg: AsgConfig {
                c_gamma: self.asg_c_gamma,
                alpha: self.asg_alpha,
                passes: self.asg_passes,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// offline, semi_online, online or kmeans.
    #[arg(long, default_value = "offline")]
    pub algorithm: Algorithm,
    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// offline, semi_online, online or kmeans.
    #[arg(long, default_value = "offline")]
    pub algorithm: Algorithm,
    /// slope, gap, silhouette, or none (then --k is required).
    #[arg(long, default_value = "slope")]
    pub method: String,
    /// Fixed number of clusters, with --method none.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    /// Smallest regression window of the slope heuristic [default: max(3, 0.3·k_max)].
    #[arg(long)]
    pub min_window: Option<usize>,
    /// Reference sets of the gap statistic.
    #[arg(long, default_value_t = DEFAULT_GAP_REFERENCES)]
    pub references: usize,
    /// Silhouette distance: euclidean or manhattan.
    #[arg(long, default_value = "euclidean")]
    pub metric: SilhouetteMetric,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated scenarios.
    #[arg(long, value_delimiter = ',', default_value = "sphere10")]
    pub scenario: Vec<Scenario>,
    /// Comma-separated algorithms [default: offline, or all with --full].
    #[arg(long, value_delimiter = ',')]
    pub algorithm: Vec<Algorithm>,
    /// Comma-separated selection methods.
    #[arg(long, value_delimiter = ',', default_value = "slope")]
    pub method: Vec<SelectionMethod>,
    /// Comma-separated contamination levels [default: 0, or the full grid with --full].
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    /// Noise law: t1, t2 (any tN) or uniform (on [-10, 10]).
    #[arg(long, default_value = "t1", value_parser = parse_law)]
    pub law: NoiseLaw,
    /// Trials per setting [default: 20, or 50 with --full].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Points per cluster for every scenario [default: 200 for sphere10, reference sizes otherwise].
    #[arg(long)]
    pub per_cluster: Option<usize>,
    /// Reference protocol: 50 trials, reference sizes, all algorithms, full rho grid.
    #[arg(long)]
    pub full: bool,
    /// Largest k tried.
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long)]
    pub min_window: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GAP_REFERENCES)]
    pub references: usize,
    #[arg(long, default_value = "euclidean")]
    pub metric: SilhouetteMetric,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Data file with the true `label` column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Predicted labels (`labels.csv` from cluster or select).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Estimated centers (`centers.csv`).
    #[arg(long, requires = "true_centers")]
    pub centers: Option<PathBuf>,
    /// True centers, same layout as `centers.csv`.
    #[arg(long, requires = "centers")]
    pub true_centers: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// `t<nu>` or `uniform`.
pub fn parse_law(s: &str) -> std::result::Result<NoiseLaw, String> {
    let s = s.to_ascii_lowercase();
    if s == "uniform" {
        return Ok(NoiseLaw::Uniform { a: -10.0, b: 10.0 });
    }
    match s.strip_prefix('t').map(str::parse::<u32>) {
        Some(Ok(nu)) if nu > 0 => Ok(NoiseLaw::Student { nu }),
        _ => Err(format!("unknown law '{s}' (expected t1, t2, … or uniform)")),
    }
}

fn data_spec(args: &DataArgs) -> Result<DataSpec> {
    let source = match (&args.input, args.scenario) {
        (Some(path), None) => DataSource::File { path: path.clone() },
        (None, Some(scenario)) => DataSource::Scenario {
            scenario,
            per_cluster: args.per_cluster,
        },
        _ => return Err(Error::Config("give exactly one of --input or --scenario".into())),
    };
    if args.per_cluster.is_some() && args.input.is_some() {
        return Err(Error::Config("--per-cluster applies to scenarios only".into()));
    }
    Ok(DataSpec {
        source,
        contamination: args.rho.map(|rho| ContaminationSpec { rho, law: args.law }),
    })
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Cluster(a) => &a.common,
            Command::Select(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Bench(a) => &a.common,
            Command::Evaluate(a) => &a.common,
        }
    }

    /// Run configuration from the flags, or from `--config`.
    pub fn to_config(&self) -> Result<RunConfig> {
        let common = self.common();
        if let Some(path) = &common.config {
            let cfg = RunConfig::load(path)?;
            let expected = match self {
                Command::Cluster(_) => "cluster",
                Command::Select(_) => "select",
                Command::Simulate(_) => "simulate",
                Command::Bench(_) => "bench",
                Command::Evaluate(_) => "evaluate",
            };
            if cfg.command.name() != expected {
                return Err(Error::Config(format!(
                    "config is for '{}', not '{expected}'",
                    cfg.command.name()
                )));
            }
            return Ok(cfg);
        }
        let command = match self {
            Command::Cluster(a) => {
                let k = a.k.ok_or_else(|| Error::Config("--k is required".into()))?;
                CommandConfig::Cluster(ClusteringRun {
                    data: data_spec(&a.data)?,
                    algorithm: a.algorithm,
                    model: ModelChoice::FixedK { k },
                    params: a.params.params(),
                })
            }
            Command::Select(a) => {
                let model = if a.method.eq_ignore_ascii_case("none") {
                    let k = a
                        .k
                        .ok_or_else(|| Error::Config("--method none needs --k".into()))?;
                    ModelChoice::FixedK { k }
                } else {
                    if a.k.is_some() {
                        return Err(Error::Config("--k needs --method none".into()));
                    }
                    ModelChoice::Select {
                        method: a.method.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                        k_max: a.k_max,
                        min_window: a.min_window,
                        gap_references: a.references,
                        silhouette_metric: a.metric,
                    }
                };
                CommandConfig::Select(ClusteringRun {
                    data: data_spec(&a.data)?,
                    algorithm: a.algorithm,
                    model,
                    params: a.params.params(),
                })
            }
            Command::Simulate(a) => CommandConfig::Simulate {
                data: data_spec(&a.data)?,
            },
            Command::Bench(a) => CommandConfig::Bench(BenchConfig {
                scenarios: a.scenario.clone(),
                sizes: match (a.per_cluster, a.full) {
                    (Some(per_cluster), _) => BenchSizes::Fixed { per_cluster },
                    (None, true) => BenchSizes::Reference,
                    (None, false) => BenchSizes::Desk,
                },
                law: a.law,
                rhos: match (a.rho.is_empty(), a.full) {
                    (false, _) => a.rho.clone(),
                    (true, true) => REFERENCE_RHOS.to_vec(),
                    (true, false) => vec![0.0],
                },
                algorithms: match (a.algorithm.is_empty(), a.full) {
                    (false, _) => a.algorithm.clone(),
                    (true, true) => Algorithm::ALL.to_vec(),
                    (true, false) => vec![Algorithm::Offline],
                },
                methods: a.method.clone(),
                trials: a
                    .trials
                    .unwrap_or(if a.full { FULL_TRIALS } else { DESK_TRIALS }),
                k_max: a.k_max,
                min_window: a.min_window,
                gap_references: a.references,
                silhouette_metric: a.metric,
                params: a.params.params(),
            }),
            Command::Evaluate(a) => CommandConfig::Evaluate(EvaluateConfig {
                truth: a
                    .input
                    .clone()
                    .ok_or_else(|| Error::Config("--input is required".into()))?,
                labels: a
                    .labels
                    .clone()
                    .ok_or_else(|| Error::Config("--labels is required".into()))?,
                centers: a.centers.clone(),
                true_centers: a.true_centers.clone(),
            }),
        };
        let cfg = RunConfig {
            seed: common.seed,
            command,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Execute `cfg`, writing every output into `out` and `report.json` last.
pub fn run(cfg: &RunConfig, out: &Path, record_timing: bool) -> Result<RunReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let started = Instant::now();
    let mut report = RunReport::new(cfg.clone());
    match &cfg.command {
        CommandConfig::Cluster(run) => commands::cmd_cluster(run, cfg.seed, out, &mut report)?,
        CommandConfig::Select(run) => commands::cmd_select(run, cfg.seed, out, &mut report)?,
        CommandConfig::Simulate { data } => commands::cmd_simulate(data, cfg.seed, out, &mut report)?,
        CommandConfig::Bench(b) => bench::cmd_bench(b, cfg.seed, out, &mut report)?,
        CommandConfig::Evaluate(e) => commands::cmd_evaluate(e, &mut report)?,
    }
    if record_timing {
        report.timing = Some(Timing {
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    io::write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

/// Process exit code for an error category.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) => 3,
        Error::Parse { .. } => 4,
        Error::Config(_) => 5,
        Error::Io(_) => 6,
        Error::Json(_) | Error::Csv(_) => 7,
    }
}

fn summary_line(report: &RunReport) -> String {
    let mut parts = Vec::new();
    if let Some(d) = &report.data {
        parts.push(format!("n={} d={}", d.n, d.d));
    }
    if let Some(s) = &report.selection {
        parts.push(format!("k_hat={}", s.k_hat));
    } else if let Some(c) = &report.clustering {
        parts.push(format!("k={}", c.k));
    }
    if let Some(c) = &report.clustering {
        parts.push(format!("distortion={:.6}", c.distortion));
    }
    if let Some(ari) = report.evaluation.as_ref().and_then(|e| e.ari) {
        parts.push(format!("ari={ari:.4}"));
    }
    if let Some(rows) = &report.bench {
        parts.push(format!("{} summary rows", rows.len()));
    }
    parts.join(" ")
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let common = cli.command.common();
    let result = cli
        .command
        .to_config()
        .and_then(|cfg| run(&cfg, &common.out, common.timing));
    match result {
        Ok(report) => {
            println!(
                "{}: {} -> {}",
                report.config.command.name(),
                summary_line(&report),
                common.out.join("report.json").display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
