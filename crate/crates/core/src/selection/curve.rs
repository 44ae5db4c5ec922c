use rayon::prelude::*;

use super::{run_seed, CurveEntry, DistortionCurve};
use crate::error::{Error, Result};
use crate::kmedians::{cluster_prepared, Algorithm, ClusterParams, ClusteringResult, Initializer};
use crate::points::PointSet;

/// Cluster for each `k` in `k_range`, sharing one prepared initializer.
pub(crate) fn cluster_range(
    points: &PointSet,
    k_range: std::ops::RangeInclusive<usize>,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<Vec<ClusteringResult>> {
    params.validate()?;
    let init = Initializer::prepare(points, &params.init)?;
    k_range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| cluster_prepared(points, k, algorithm, params, &init, run_seed(seed, k)))
        .collect()
}

/// Best distortion for `k = 1..=k_max`. The run at `k` is seeded with
/// [`run_seed`]`(seed, k)`, so the curve does not depend on thread count.
pub fn distortion_curve(
    points: &PointSet,
    k_max: usize,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<DistortionCurve> {
    points.check_nonempty()?;
    if k_max == 0 || k_max > points.len() {
        return Err(Error::input(format!(
            "k_max must lie in 1..={}, got {k_max}",
            points.len()
        )));
    }
    let results = cluster_range(points, 1..=k_max, algorithm, params, seed)?;
    let entries = results
        .into_iter()
        .map(|r| CurveEntry {
            k: r.k(),
            distortion: r.distortion,
            result: Some(r),
        })
        .collect();
    Ok(DistortionCurve {
        n: points.len(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomedian::{weiszfeld_median, DEFAULT_MAX_ITER, DEFAULT_TOL};

    #[test]
    fn single_entry_is_geometric_median_objective() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [1.0, 3.0], [2.0, -1.0], [9.0, 9.0]])
            .unwrap();
        let c = distortion_curve(&p, 1, Algorithm::Offline, &ClusterParams::default(), 0).unwrap();
        assert_eq!(c.entries.len(), 1);
        let m = weiszfeld_median(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((c.entries[0].distortion - m.objective).abs() < 1e-9);
    }

    #[test]
    fn full_curve_reaches_zero() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [4.0, 0.0], [1.0, 3.0], [2.0, -1.0], [9.0, 9.0]])
            .unwrap();
        for algorithm in Algorithm::ALL {
            let c = distortion_curve(&p, 5, algorithm, &ClusterParams::default(), 0).unwrap();
            assert_eq!(c.entries.len(), 5);
            assert_eq!(c.entries[4].distortion, 0.0, "{algorithm}");
            assert!(c.entries.iter().enumerate().all(|(i, e)| e.k == i + 1));
        }
        assert!(distortion_curve(&p, 6, Algorithm::Offline, &ClusterParams::default(), 0).is_err());
        assert!(distortion_curve(&p, 0, Algorithm::Offline, &ClusterParams::default(), 0).is_err());
    }
}
