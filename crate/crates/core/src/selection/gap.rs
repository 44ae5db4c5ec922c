use rand::Rng as _;
use rayon::prelude::*;

use super::curve::cluster_range;
use super::{CriterionPoint, CurveEntry, DistortionCurve, SelectionMethod, SelectionReport};
use crate::error::{Error, Result};
use crate::kmedians::{distortion_of, Algorithm, ClusterParams, DistortionNorm};
use crate::points::PointSet;
use crate::rng::{derive_seed2, rng_from, stream};

pub const DEFAULT_GAP_REFERENCES: usize = 20;

/// Uniform sample over the per-coordinate range of `points`.
fn reference_set(points: &PointSet, seed: u64) -> Result<PointSet> {
    let bounds = points.bounds();
    let mut rng = rng_from(seed);
    let mut data = Vec::with_capacity(points.len() * points.dim());
    for _ in 0..points.len() {
        for &(lo, hi) in &bounds {
            data.push(if hi > lo { rng.random_range(lo..hi) } else { lo });
        }
    }
    PointSet::from_flat(points.dim(), data)
}

/// L¹ distortion for `k = 1..=k_max`, stopping before the first zero.
fn log_distortions(
    points: &PointSet,
    k_max: usize,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<(Vec<f64>, Vec<crate::kmedians::ClusteringResult>)> {
    let results = cluster_range(points, 1..=k_max, algorithm, params, seed)?;
    let mut logs = Vec::with_capacity(k_max);
    let mut kept = Vec::with_capacity(k_max);
    for r in results {
        let w = distortion_of(points, r.codebook.centers(), DistortionNorm::L1);
        if w <= 0.0 {
            break;
        }
        logs.push(w.ln());
        kept.push(r);
    }
    Ok((logs, kept))
}

/// Gap statistic with uniform reference sets over the data's bounding box.
///
/// Returns the report together with the L¹ distortion curve of the data
/// (clustering results attached).
pub fn gap_analysis(
    points: &PointSet,
    k_max: usize,
    references: usize,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<(SelectionReport, DistortionCurve)> {
    points.check_nonempty()?;
    if k_max == 0 || k_max > points.len() {
        return Err(Error::input(format!(
            "k_max must lie in 1..={}, got {k_max}",
            points.len()
        )));
    }
    if references == 0 {
        return Err(Error::input("at least one reference set is required"));
    }
    if points.bounds().iter().all(|(lo, hi)| hi <= lo) {
        return Err(Error::input("data has zero range in every coordinate"));
    }

    let (log_w, results) = log_distortions(points, k_max, algorithm, params, seed)?;
    // A zero distortion at k ends the search: only smaller k are eligible.
    let k_last = log_w.len();
    if k_last == 0 {
        return Err(Error::input("zero distortion at k = 1"));
    }

    let reference_logs: Vec<Vec<f64>> = (0..references)
        .into_par_iter()
        .map(|b| {
            let ref_seed = derive_seed2(seed, stream::REFERENCE, b as u64);
            let reference = reference_set(points, ref_seed)?;
            let (logs, _) = log_distortions(&reference, k_last, algorithm, params, ref_seed)?;
            if logs.len() < k_last {
                return Err(Error::input("zero distortion on a reference set"));
            }
            Ok(logs)
        })
        .collect::<Result<_>>()?;

    let bf = references as f64;
    let mut gap = Vec::with_capacity(k_last);
    let mut sd = Vec::with_capacity(k_last);
    for k in 0..k_last {
        let mean = reference_logs.iter().map(|l| l[k]).sum::<f64>() / bf;
        let var = reference_logs.iter().map(|l| (l[k] - mean).powi(2)).sum::<f64>() / bf;
        gap.push(mean - log_w[k]);
        sd.push(var.sqrt() * (1.0 + 1.0 / bf).sqrt());
    }
    let k_hat = (0..k_last.saturating_sub(1))
        .find(|&i| gap[i] >= gap[i + 1] - sd[i + 1])
        .map_or(k_last, |i| i + 1);

    let report = SelectionReport {
        method: SelectionMethod::Gap,
        k_hat,
        criterion_values: gap
            .iter()
            .enumerate()
            .map(|(i, &value)| CriterionPoint { k: i + 1, value })
            .collect(),
        slope_constant: None,
        slope_clamped: false,
        window_table: None,
        chosen_window: None,
        gap_sd: Some(sd),
    };
    let curve = DistortionCurve {
        n: points.len(),
        entries: results
            .into_iter()
            .zip(&log_w)
            .map(|(r, lw)| CurveEntry {
                k: r.k(),
                distortion: lw.exp(),
                result: Some(r),
            })
            .collect(),
    };
    Ok((report, curve))
}

pub fn gap_select(
    points: &PointSet,
    k_max: usize,
    references: usize,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<SelectionReport> {
    gap_analysis(points, k_max, references, algorithm, params, seed).map(|r| r.0)
}
