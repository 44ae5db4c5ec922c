use serde::{Deserialize, Serialize};

use super::init::Initializer;
use super::{
    check_k, distortion_of, nearest_center, Algorithm, ClusterParams, ClusteringResult, Codebook,
    InitMethod,
};
use crate::error::Result;
use crate::geomedian::{weiszfeld_rows, AsgConfig, AsgState};
use crate::points::PointSet;
use crate::rng::{derive_seed2, rng_from, shuffled_indices, stream, Rng};

/// Geometric-median solver used in the M-step of Lloyd K-medians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianBackend {
    Weiszfeld,
    Asg,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum CenterUpdate {
    Weiszfeld { tol: f64, max_iter: usize },
    Asg(AsgConfig),
    Mean,
}

impl CenterUpdate {
    /// New center for one non-empty cluster, starting from its current center.
    fn update(&self, members: &[&[f64]], previous: &[f64], rng: &mut Rng) -> Vec<f64> {
        match *self {
            CenterUpdate::Weiszfeld { tol, max_iter } => {
                weiszfeld_rows(members, previous.to_vec(), tol, max_iter, |_| {}).0
            }
            CenterUpdate::Asg(cfg) => {
                let mut state = AsgState::new(previous.to_vec());
                for _ in 0..cfg.passes {
                    for i in shuffled_indices(members.len(), rng) {
                        state.update(members[i], &cfg);
                    }
                }
                state.average
            }
            CenterUpdate::Mean => {
                let mut mean = vec![0.0; previous.len()];
                for x in members {
                    for (m, v) in mean.iter_mut().zip(x.iter()) {
                        *m += v;
                    }
                }
                let n = members.len() as f64;
                mean.iter_mut().for_each(|m| *m /= n);
                mean
            }
        }
    }
}

/// Labels plus squared distance to the assigned center.
fn assign_all(points: &PointSet, centers: &[Vec<f64>], labels: &mut [usize], d2: &mut [f64]) {
    for (i, x) in points.rows().enumerate() {
        let (j, d) = nearest_center(centers, x);
        labels[i] = j;
        d2[i] = d;
    }
}

/// Move the center of every empty cluster onto the point farthest from its
/// nearest center, then reassign. Repeats while a cluster is still empty,
/// at most `k` times.
fn fill_empty_clusters(
    points: &PointSet,
    centers: &mut [Vec<f64>],
    labels: &mut [usize],
    d2: &mut [f64],
) {
    let k = centers.len();
    for _ in 0..k {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        if sizes.iter().all(|&s| s > 0) {
            return;
        }
        let mut moved = false;
        for j in 0..k {
            if sizes[j] > 0 {
                continue;
            }
            let farthest = |shared_only: bool| {
                let mut best: Option<usize> = None;
                for i in 0..labels.len() {
                    if d2[i] <= 0.0 || (shared_only && sizes[labels[i]] < 2) {
                        continue;
                    }
                    if best.is_none_or(|b| d2[i] > d2[b]) {
                        best = Some(i);
                    }
                }
                best
            };
            let Some(i) = farthest(true).or_else(|| farthest(false)) else {
                // fewer distinct points than clusters
                return;
            };
            centers[j].copy_from_slice(points.row(i));
            sizes[labels[i]] -= 1;
            sizes[j] = 1;
            labels[i] = j;
            d2[i] = 0.0;
            moved = true;
        }
        if !moved {
            return;
        }
        assign_all(points, centers, labels, d2);
    }
}

/// One Lloyd descent from `centers`. Returns final centers and the number of
/// (M-step, assignment) cycles performed.
pub(crate) fn lloyd_descent(
    points: &PointSet,
    mut centers: Vec<Vec<f64>>,
    update: CenterUpdate,
    max_iter: usize,
    rng: &mut Rng,
    mut on_cycle: impl FnMut(&[Vec<f64>]),
) -> (Vec<Vec<f64>>, usize) {
    let n = points.len();
    let k = centers.len();
    let mut labels = vec![0usize; n];
    let mut d2 = vec![0.0; n];
    assign_all(points, &centers, &mut labels, &mut d2);
    fill_empty_clusters(points, &mut centers, &mut labels, &mut d2);
    on_cycle(&centers);

    let mut members: Vec<Vec<&[f64]>> = vec![Vec::new(); k];
    let mut next_labels = vec![0usize; n];
    let mut iterations = 0;
    while iterations < max_iter {
        members.iter_mut().for_each(Vec::clear);
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(points.row(i));
        }
        for (center, rows) in centers.iter_mut().zip(&members) {
            if !rows.is_empty() {
                *center = update.update(rows, center, rng);
            }
        }
        iterations += 1;
        assign_all(points, &centers, &mut next_labels, &mut d2);
        fill_empty_clusters(points, &mut centers, &mut next_labels, &mut d2);
        on_cycle(&centers);
        if next_labels == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next_labels);
    }
    (centers, iterations)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_lloyd(
    points: &PointSet,
    k: usize,
    update: CenterUpdate,
    init: &Initializer,
    max_iter: usize,
    n_start: usize,
    seed: u64,
    algorithm: Algorithm,
) -> Result<ClusteringResult> {
    check_k(points, k)?;
    let norm = algorithm.norm();
    // With a deterministic initializer and no random visiting order every
    // restart would repeat the first one.
    let restarts = if init.is_random() || matches!(update, CenterUpdate::Asg(_)) {
        n_start.max(1)
    } else {
        1
    };
    let mut best: Option<(f64, Vec<Vec<f64>>, usize)> = None;
    for restart in 0..restarts {
        let mut rng = rng_from(derive_seed2(seed, stream::RESTART, restart as u64));
        let start = init.centers(points, k, &mut rng)?;
        let (centers, iterations) =
            lloyd_descent(points, start.into_centers(), update, max_iter, &mut rng, |_| {});
        let distortion = distortion_of(points, &centers, norm);
        if best.as_ref().is_none_or(|b| distortion < b.0) {
            best = Some((distortion, centers, iterations));
        }
    }
    let (_, centers, iterations) = best.expect("at least one restart");
    finish(points, centers, iterations, restarts, algorithm)
}

pub(crate) fn finish(
    points: &PointSet,
    centers: Vec<Vec<f64>>,
    iterations: usize,
    restarts_used: usize,
    algorithm: Algorithm,
) -> Result<ClusteringResult> {
    let codebook = Codebook::new(centers)?;
    let labels: Vec<usize> = points.rows().map(|x| codebook.nearest(x).0).collect();
    let distortion = distortion_of(points, codebook.centers(), algorithm.norm());
    Ok(ClusteringResult {
        codebook,
        labels,
        distortion,
        iterations,
        restarts_used,
        algorithm,
    })
}

/// Lloyd K-medians: `Weiszfeld` is the offline variant, `Asg` the semi-online one.
pub fn lloyd_kmedians(
    points: &PointSet,
    k: usize,
    backend: MedianBackend,
    init: &InitMethod,
    max_iter: usize,
    n_start: usize,
    seed: u64,
) -> Result<ClusteringResult> {
    let params = ClusterParams {
        init: init.clone(),
        max_iter,
        n_start,
        ..ClusterParams::default()
    };
    let algorithm = match backend {
        MedianBackend::Weiszfeld => Algorithm::Offline,
        MedianBackend::Asg => Algorithm::SemiOnline,
    };
    super::cluster(points, k, algorithm, &params, seed)
}

/// Lloyd K-means with arithmetic-mean centers and squared-distance distortion.
pub fn kmeans_baseline(
    points: &PointSet,
    k: usize,
    init: &InitMethod,
    max_iter: usize,
    n_start: usize,
    seed: u64,
) -> Result<ClusteringResult> {
    let params = ClusterParams {
        init: init.clone(),
        max_iter,
        n_start,
        ..ClusterParams::default()
    };
    super::cluster(points, k, Algorithm::Kmeans, &params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::init::plus_plus_l1;
    use crate::geomedian::{DEFAULT_MAX_ITER, DEFAULT_TOL};
    use crate::kmedians::{assign, empirical_distortion, DistortionNorm};
    use crate::rng::rng_from;
    use rand::Rng as _;

    fn random_points(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = rng_from(seed);
        let data = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
        PointSet::from_flat(d, data).unwrap()
    }

    #[test]
    fn corners_of_square_have_zero_distortion() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [1e6, 0.0], [0.0, 1e6], [1e6, 1e6]]).unwrap();
        for backend in [MedianBackend::Weiszfeld, MedianBackend::Asg] {
            let r = lloyd_kmedians(&p, 4, backend, &InitMethod::default(), 100, 5, 1).unwrap();
            assert_eq!(r.distortion, 0.0);
        }
        let r = kmeans_baseline(&p, 4, &InitMethod::default(), 100, 5, 1).unwrap();
        assert_eq!(r.distortion, 0.0);
    }

    #[test]
    fn rejects_bad_k() {
        let p = random_points(5, 2, 0);
        let init = InitMethod::default();
        assert!(lloyd_kmedians(&p, 0, MedianBackend::Weiszfeld, &init, 10, 1, 0).is_err());
        assert!(lloyd_kmedians(&p, 6, MedianBackend::Weiszfeld, &init, 10, 1, 0).is_err());
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // Third center starts far from everything and gets no points.
        let p = PointSet::from_rows(&[[0.0], [0.1], [5.0], [5.1], [9.0]]).unwrap();
        let init = InitMethod::Provided {
            centers: Codebook::new(vec![vec![0.0], vec![5.0], vec![1000.0]]).unwrap(),
        };
        let r = lloyd_kmedians(&p, 3, MedianBackend::Weiszfeld, &init, 100, 1, 0).unwrap();
        let sizes = r.cluster_sizes();
        assert!(sizes.iter().all(|&s| s > 0), "{sizes:?}");
        assert!(r.codebook.centers().iter().all(|c| c[0] < 10.0));
    }

    #[test]
    fn descent_is_monotone() {
        let update = CenterUpdate::Weiszfeld {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        };
        for seed in 0..60 {
            let p = random_points(40, 2, seed);
            let k = 2 + (seed as usize % 4);
            let mut rng = rng_from(seed);
            let start = plus_plus_l1(&p, k, &mut rng).into_centers();
            let mut history = Vec::new();
            lloyd_descent(&p, start, update, 100, &mut rng, |c| {
                history.push(distortion_of(&p, c, DistortionNorm::L1))
            });
            for w in history.windows(2) {
                assert!(w[1] <= w[0] + 1e-6, "seed {seed}: {history:?}");
            }
        }
    }

    #[test]
    fn result_is_self_consistent() {
        for algorithm in [Algorithm::Offline, Algorithm::SemiOnline, Algorithm::Kmeans] {
            let p = random_points(60, 3, 9);
            let r = super::super::cluster(&p, 4, algorithm, &ClusterParams::default(), 3).unwrap();
            assert_eq!(r.labels, assign(&p, &r.codebook).unwrap());
            let recomputed = empirical_distortion(&p, &r.codebook, algorithm.norm()).unwrap();
            assert!((r.distortion - recomputed).abs() <= 1e-10 * recomputed.max(1.0));
            // the default initializer is deterministic, so only the random
            // visiting order of the semi-online M-step makes restarts differ
            let expected = if algorithm == Algorithm::SemiOnline { 5 } else { 1 };
            assert_eq!(r.restarts_used, expected);
        }
    }
}
