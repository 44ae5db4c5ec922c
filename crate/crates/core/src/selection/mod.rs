//! Choosing the number of clusters.
//!
//! The main selector minimizes the penalized distortion
//! `crit(k) = W_n(k) + 2·Ŝ·√(k/n)`, where the constant `Ŝ` is calibrated
//! from the data as the slope of `−W_n(k)` against `√(k/n)` over the largest
//! values of `k` (the slope heuristic). Gap-statistic and mean-silhouette
//! selectors are provided as baselines.

mod curve;
mod gap;
mod silhouette;
mod slope;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmedians::{Algorithm, ClusterParams, ClusteringResult};
use crate::points::PointSet;
use crate::rng::derive_seed2;

pub use curve::distortion_curve;
pub use gap::{gap_analysis, gap_select, DEFAULT_GAP_REFERENCES};
pub use silhouette::{
    mean_silhouette, silhouette_analysis, silhouette_scores, silhouette_select, SilhouetteMetric,
};
pub use slope::{default_min_window, slope_select};

/// Seed of the clustering run at `k` inside a selection pass.
pub fn run_seed(seed: u64, k: usize) -> u64 {
    derive_seed2(seed, 100, k as u64)
}

/// `√(k/n)`.
pub fn penalty_shape(k: usize, n: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::input(format!("penalty shape needs 1 ≤ k ≤ n, got k={k}, n={n}")));
    }
    Ok((k as f64 / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub k: usize,
    pub distortion: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<ClusteringResult>,
}

/// Best achieved distortion for each `k` in a contiguous range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionCurve {
    pub n: usize,
    pub entries: Vec<CurveEntry>,
}

impl DistortionCurve {
    /// Curve from bare values for `k = k_min, k_min + 1, …`.
    pub fn from_values(n: usize, k_min: usize, distortions: &[f64]) -> Result<Self> {
        let entries = distortions
            .iter()
            .enumerate()
            .map(|(i, &d)| CurveEntry {
                k: k_min + i,
                distortion: d,
                result: None,
            })
            .collect();
        let curve = Self { n, entries };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.entries.first() else {
            return Err(Error::input("distortion curve is empty"));
        };
        if first.k == 0 {
            return Err(Error::input("curve must start at k ≥ 1"));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.k != first.k + i {
                return Err(Error::input("curve entries must be contiguous in k"));
            }
            if !(e.distortion >= 0.0 && e.distortion.is_finite()) {
                return Err(Error::input(format!("invalid distortion at k={}", e.k)));
            }
            if e.k > self.n {
                return Err(Error::input(format!("k={} exceeds n={}", e.k, self.n)));
            }
        }
        Ok(())
    }

    pub fn k_max(&self) -> usize {
        self.entries.last().map_or(0, |e| e.k)
    }

    pub fn distortions(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distortion).collect()
    }

    pub fn result_at(&self, k: usize) -> Option<&ClusteringResult> {
        self.entries
            .iter()
            .find(|e| e.k == k)
            .and_then(|e| e.result.as_ref())
    }

    /// Copy without the per-k clustering results.
    pub fn without_results(&self) -> Self {
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|e| CurveEntry {
                    k: e.k,
                    distortion: e.distortion,
                    result: None,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Slope,
    Gap,
    Silhouette,
}

impl SelectionMethod {
    pub const ALL: [SelectionMethod; 3] = [
        SelectionMethod::Slope,
        SelectionMethod::Gap,
        SelectionMethod::Silhouette,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SelectionMethod::Slope => "slope",
            SelectionMethod::Gap => "gap",
            SelectionMethod::Silhouette => "silhouette",
        }
    }
}

impl std::str::FromStr for SelectionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "slope" => Ok(SelectionMethod::Slope),
            "gap" => Ok(SelectionMethod::Gap),
            "silhouette" => Ok(SelectionMethod::Silhouette),
            other => Err(Error::input(format!("unknown selection method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionPoint {
    pub k: usize,
    pub value: f64,
}

/// Slope fitted on the `window` largest values of `k`, and the resulting choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub window: usize,
    pub slope: f64,
    pub k_hat: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: SelectionMethod,
    pub k_hat: usize,
    /// `crit(k)`, `Gap(k)` or mean silhouette, per `k`.
    pub criterion_values: Vec<CriterionPoint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slope_constant: Option<f64>,
    /// The fitted slope for the chosen window was negative and set to zero.
    #[serde(default)]
    pub slope_clamped: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window_table: Option<Vec<WindowRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chosen_window: Option<usize>,
    /// Gap standard errors `s_k`, aligned with `criterion_values`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap_sd: Option<Vec<f64>>,
}

impl SelectionReport {
    pub fn criterion_at(&self, k: usize) -> Option<f64> {
        self.criterion_values.iter().find(|c| c.k == k).map(|c| c.value)
    }
}

/// Options for [`select`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectConfig {
    pub method: SelectionMethod,
    pub algorithm: Algorithm,
    pub k_max: usize,
    /// Slope method; `None` means [`default_min_window`].
    pub min_window: Option<usize>,
    pub gap_references: usize,
    pub silhouette_metric: SilhouetteMetric,
    pub params: ClusterParams,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            method: SelectionMethod::Slope,
            algorithm: Algorithm::Offline,
            k_max: 10,
            min_window: None,
            gap_references: DEFAULT_GAP_REFERENCES,
            silhouette_metric: SilhouetteMetric::Euclidean,
            params: ClusterParams::default(),
        }
    }
}

/// Outcome of a full selection pass.
#[derive(Debug, Clone)]
pub struct Selection {
    pub report: SelectionReport,
    /// Distortions computed on the data (L¹ for gap, native for the others).
    pub curve: DistortionCurve,
    /// Clustering at the selected `k`.
    pub chosen: ClusteringResult,
}

/// Cluster for every candidate `k` and pick one with the configured method.
pub fn select(points: &PointSet, cfg: &SelectConfig, seed: u64) -> Result<Selection> {
    let (report, curve) = match cfg.method {
        SelectionMethod::Slope => {
            let curve = distortion_curve(points, cfg.k_max, cfg.algorithm, &cfg.params, seed)?;
            let window = cfg.min_window.unwrap_or_else(|| default_min_window(cfg.k_max));
            (slope_select(&curve, window)?, curve)
        }
        SelectionMethod::Gap => gap_analysis(
            points,
            cfg.k_max,
            cfg.gap_references,
            cfg.algorithm,
            &cfg.params,
            seed,
        )?,
        SelectionMethod::Silhouette => silhouette_analysis(
            points,
            cfg.k_max,
            cfg.silhouette_metric,
            cfg.algorithm,
            &cfg.params,
            seed,
        )?,
    };
    let chosen = curve
        .result_at(report.k_hat)
        .cloned()
        .ok_or_else(|| Error::input("selected k has no clustering result"))?;
    Ok(Selection {
        report,
        curve,
        chosen,
    })
}
