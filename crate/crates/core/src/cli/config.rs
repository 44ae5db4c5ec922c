//! Run configuration and report documents.
//!
//! A [`RunConfig`] fully determines a run apart from its output directory,
//! so the `config` member of a written report can be fed back with
//! `--config` to repeat the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::TrialSummary;
use crate::kmedians::{Algorithm, ClusterParams, ClusteringResult};
use crate::selection::{SelectionMethod, SelectionReport, SilhouetteMetric};
use crate::simulation::{ContaminationSpec, NoiseLaw, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    File {
        path: PathBuf,
    },
    Scenario {
        scenario: Scenario,
        /// Points per cluster (total points for `s1`); `None` means the
        /// scenario's reference size.
        per_cluster: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub source: DataSource,
    pub contamination: Option<ContaminationSpec>,
}

/// Either a fixed number of clusters or a selection method over `1..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ModelChoice {
    FixedK {
        k: usize,
    },
    Select {
        method: SelectionMethod,
        k_max: usize,
        min_window: Option<usize>,
        gap_references: usize,
        silhouette_metric: SilhouetteMetric,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringRun {
    pub data: DataSpec,
    pub algorithm: Algorithm,
    pub model: ModelChoice,
    pub params: ClusterParams,
}

/// Per-cluster sample sizes used by `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchSizes {
    /// 200 points per cluster for `sphere10`, reference sizes otherwise.
    Desk,
    /// Each scenario's reference size.
    Reference,
    Fixed { per_cluster: usize },
}

impl BenchSizes {
    pub fn per_cluster(self, scenario: Scenario) -> usize {
        match (self, scenario) {
            (BenchSizes::Fixed { per_cluster }, _) => per_cluster,
            (BenchSizes::Desk, Scenario::Sphere10) => 200,
            _ => scenario.default_per_cluster(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub scenarios: Vec<Scenario>,
    pub sizes: BenchSizes,
    pub law: NoiseLaw,
    pub rhos: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub methods: Vec<SelectionMethod>,
    pub trials: usize,
    pub k_max: usize,
    pub min_window: Option<usize>,
    pub gap_references: usize,
    pub silhouette_metric: SilhouetteMetric,
    pub params: ClusterParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    /// Data file carrying the `label` (and optionally `contaminated`) column.
    pub truth: PathBuf,
    /// Predicted labels, as written by `cluster` or `select`.
    pub labels: PathBuf,
    pub centers: Option<PathBuf>,
    pub true_centers: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandConfig {
    Cluster(ClusteringRun),
    Select(ClusteringRun),
    Simulate { data: DataSpec },
    Bench(BenchConfig),
    Evaluate(EvaluateConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Cluster(_) => "cluster",
            CommandConfig::Select(_) => "select",
            CommandConfig::Simulate { .. } => "simulate",
            CommandConfig::Bench(_) => "bench",
            CommandConfig::Evaluate(_) => "evaluate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(flatten)]
    pub command: CommandConfig,
}

impl RunConfig {
    /// Structural checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        let check_data = |data: &DataSpec| -> Result<()> {
            if let Some(c) = &data.contamination {
                c.validate().map_err(config_error)?;
            }
            if let DataSource::Scenario {
                per_cluster: Some(0),
                ..
            } = data.source
            {
                return Err(Error::Config("per_cluster must be at least 1".into()));
            }
            Ok(())
        };
        match &self.command {
            CommandConfig::Cluster(run) | CommandConfig::Select(run) => {
                check_data(&run.data)?;
                run.params.validate().map_err(config_error)?;
                match run.model {
                    ModelChoice::FixedK { k } if k == 0 => {
                        Err(Error::Config("k must be at least 1".into()))
                    }
                    ModelChoice::Select { k_max, .. } if k_max == 0 => {
                        Err(Error::Config("k_max must be at least 1".into()))
                    }
                    ModelChoice::Select {
                        gap_references: 0,
                        method: SelectionMethod::Gap,
                        ..
                    } => Err(Error::Config("gap needs at least one reference set".into())),
                    ModelChoice::FixedK { .. } if matches!(self.command, CommandConfig::Select(_)) => {
                        Ok(())
                    }
                    ModelChoice::Select { .. } if matches!(self.command, CommandConfig::Cluster(_)) => {
                        Err(Error::Config("cluster needs a fixed k".into()))
                    }
                    _ => Ok(()),
                }
            }
            CommandConfig::Simulate { data } => {
                check_data(data)?;
                if !matches!(data.source, DataSource::Scenario { .. }) {
                    return Err(Error::Config("simulate needs a scenario".into()));
                }
                Ok(())
            }
            CommandConfig::Bench(b) => {
                b.params.validate().map_err(config_error)?;
                if b.trials == 0 {
                    return Err(Error::Config("trials must be at least 1".into()));
                }
                if b.scenarios.is_empty() || b.algorithms.is_empty() || b.methods.is_empty() {
                    return Err(Error::Config(
                        "bench needs at least one scenario, algorithm and method".into(),
                    ));
                }
                if b.rhos.is_empty() {
                    return Err(Error::Config("bench needs at least one rho".into()));
                }
                for &rho in &b.rhos {
                    ContaminationSpec { rho, law: b.law }
                        .validate()
                        .map_err(config_error)?;
                }
                if b.sizes == (BenchSizes::Fixed { per_cluster: 0 }) {
                    return Err(Error::Config("per_cluster must be at least 1".into()));
                }
                Ok(())
            }
            CommandConfig::Evaluate(_) => Ok(()),
        }
    }

    /// Load a config file, or the `config` member of a report file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let value = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Config(msg),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub d: usize,
    pub contaminated: usize,
    pub k_true: Option<usize>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSummary {
    pub algorithm: Algorithm,
    pub k: usize,
    pub centers: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    pub distortion: f64,
    pub iterations: usize,
    pub restarts_used: usize,
}

impl From<&ClusteringResult> for ClusteringSummary {
    fn from(r: &ClusteringResult) -> Self {
        Self {
            algorithm: r.algorithm,
            k: r.k(),
            centers: r.codebook.centers().to_vec(),
            sizes: r.cluster_sizes(),
            distortion: r.distortion,
            iterations: r.iterations,
            restarts_used: r.restarts_used,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    /// ARI over points with a known true label.
    pub ari: Option<f64>,
    pub centroid_l1_error: Option<f64>,
    pub evaluated_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: Scenario,
    pub law: String,
    pub rho: f64,
    pub algorithm: Algorithm,
    pub method: SelectionMethod,
    pub k_true: usize,
    #[serde(flatten)]
    pub summary: TrialSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub data: Option<DataSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection: Option<SelectionReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clustering: Option<ClusteringSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evaluation: Option<EvaluationSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bench: Option<Vec<BenchRow>>,
    /// Other files written next to the report.
    pub files: Vec<String>,
    /// Wall-clock time; only recorded on request so reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn new(config: RunConfig) -> Self {
        Self {
            config,
            data: None,
            selection: None,
            clustering: None,
            evaluation: None,
            bench: None,
            files: Vec::new(),
            timing: None,
        }
    }
}
