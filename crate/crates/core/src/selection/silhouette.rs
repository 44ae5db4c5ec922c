use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::cluster_range;
use super::{CriterionPoint, CurveEntry, DistortionCurve, SelectionMethod, SelectionReport};
use crate::error::{Error, Result};
use crate::kmedians::{Algorithm, ClusterParams};
use crate::points::{dist, manhattan, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SilhouetteMetric {
    #[default]
    Euclidean,
    Manhattan,
}

impl std::str::FromStr for SilhouetteMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(SilhouetteMetric::Euclidean),
            "manhattan" => Ok(SilhouetteMetric::Manhattan),
            other => Err(Error::input(format!("unknown metric '{other}'"))),
        }
    }
}

/// Per-point silhouette `(b − a) / max(a, b)`.
///
/// Points alone in their cluster score 0, as do points with `a = b = 0`.
pub fn silhouette_scores(
    points: &PointSet,
    labels: &[usize],
    metric: SilhouetteMetric,
) -> Result<Vec<f64>> {
    if labels.len() != points.len() {
        return Err(Error::input("one label per point is required"));
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let distance = match metric {
        SilhouetteMetric::Euclidean => dist,
        SilhouetteMetric::Manhattan => manhattan,
    };
    let scores = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let own = labels[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let xi = points.row(i);
            let mut sums = vec![0.0; k];
            for (j, xj) in points.rows().enumerate() {
                if j != i {
                    sums[labels[j]] += distance(xi, xj);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if !b.is_finite() {
                return 0.0;
            }
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    Ok(scores)
}

pub fn mean_silhouette(points: &PointSet, labels: &[usize], metric: SilhouetteMetric) -> Result<f64> {
    let s = silhouette_scores(points, labels, metric)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Mean silhouette for `k = 2..=k_max`; returns the report and the
/// distortion curve (from `k = 2`) with results attached.
pub fn silhouette_analysis(
    points: &PointSet,
    k_max: usize,
    metric: SilhouetteMetric,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<(SelectionReport, DistortionCurve)> {
    if k_max < 2 {
        return Err(Error::input("silhouette selection needs k_max ≥ 2"));
    }
    points.check_nonempty()?;
    if k_max > points.len() {
        return Err(Error::input(format!(
            "k_max = {k_max} exceeds n = {}",
            points.len()
        )));
    }
    let results = cluster_range(points, 2..=k_max, algorithm, params, seed)?;
    let mut criterion = Vec::with_capacity(results.len());
    for r in &results {
        criterion.push(CriterionPoint {
            k: r.k(),
            value: mean_silhouette(points, &r.labels, metric)?,
        });
    }
    let mut best = 0;
    for (i, c) in criterion.iter().enumerate() {
        if c.value > criterion[best].value {
            best = i;
        }
    }
    let report = SelectionReport {
        method: SelectionMethod::Silhouette,
        k_hat: criterion[best].k,
        criterion_values: criterion,
        slope_constant: None,
        slope_clamped: false,
        window_table: None,
        chosen_window: None,
        gap_sd: None,
    };
    let curve = DistortionCurve {
        n: points.len(),
        entries: results
            .into_iter()
            .map(|r| CurveEntry {
                k: r.k(),
                distortion: r.distortion,
                result: Some(r),
            })
            .collect(),
    };
    Ok((report, curve))
}

pub fn silhouette_select(
    points: &PointSet,
    k_max: usize,
    metric: SilhouetteMetric,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<SelectionReport> {
    silhouette_analysis(points, k_max, metric, algorithm, params, seed).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook definition evaluated with explicit member lists.
    fn brute_force(points: &PointSet, labels: &[usize]) -> f64 {
        let n = points.len();
        let k = labels.iter().max().unwrap() + 1;
        let mut total = 0.0;
        for i in 0..n {
            let members = |c: usize| (0..n).filter(move |&j| labels[j] == c && j != i);
            let own: Vec<usize> = members(labels[i]).collect();
            if own.is_empty() {
                continue;
            }
            let a = own.iter().map(|&j| dist(points.row(i), points.row(j))).sum::<f64>()
                / own.len() as f64;
            let mut b = f64::INFINITY;
            for c in (0..k).filter(|&c| c != labels[i]) {
                let m: Vec<usize> = members(c).collect();
                if !m.is_empty() {
                    let mean = m.iter().map(|&j| dist(points.row(i), points.row(j))).sum::<f64>()
                        / m.len() as f64;
                    b = b.min(mean);
                }
            }
            total += (b - a) / a.max(b);
        }
        total / n as f64
    }

    fn three_groups() -> (PointSet, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, (cx, cy)) in [(0.0, 0.0), (10.0, 0.0), (0.0, 12.0)].iter().enumerate() {
            for i in 0..6 {
                let t = i as f64;
                rows.push([cx + (t * 1.7).sin(), cy + (t * 0.9).cos()]);
                labels.push(c);
            }
        }
        (PointSet::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn matches_definition() {
        let (p, labels) = three_groups();
        let fast = mean_silhouette(&p, &labels, SilhouetteMetric::Euclidean).unwrap();
        assert!((fast - brute_force(&p, &labels)).abs() < 1e-12);
        let merged: Vec<usize> = labels.iter().map(|&l| l.min(1)).collect();
        let fast = mean_silhouette(&p, &merged, SilhouetteMetric::Euclidean).unwrap();
        assert!((fast - brute_force(&p, &merged)).abs() < 1e-12);
    }

    #[test]
    fn identical_points_score_zero() {
        let p = PointSet::from_rows(&[[2.0, 2.0]; 6]).unwrap();
        let s = silhouette_scores(&p, &[0, 0, 0, 1, 1, 1], SilhouetteMetric::Euclidean).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singletons_score_zero_and_range_holds() {
        let (p, mut labels) = three_groups();
        labels[0] = 3;
        for metric in [SilhouetteMetric::Euclidean, SilhouetteMetric::Manhattan] {
            let s = silhouette_scores(&p, &labels, metric).unwrap();
            assert_eq!(s[0], 0.0);
            assert!(s.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn selects_separated_groups() {
        let (p, _) = three_groups();
        let r = silhouette_select(
            &p,
            6,
            SilhouetteMetric::Euclidean,
            Algorithm::Offline,
            &ClusterParams::default(),
            0,
        )
        .unwrap();
        assert_eq!(r.k_hat, 3);
        assert_eq!(r.criterion_values.first().unwrap().k, 2);
        assert!(silhouette_select(
            &p,
            1,
            SilhouetteMetric::Euclidean,
            Algorithm::Offline,
            &ClusterParams::default(),
            0
        )
        .is_err());
    }
}
