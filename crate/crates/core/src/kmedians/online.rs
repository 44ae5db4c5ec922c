use super::init::Initializer;
use super::lloyd::finish;
use super::{check_k, nearest_center, Algorithm, ClusteringResult, InitMethod};
use crate::error::Result;
use crate::geomedian::{AsgConfig, AsgState};
use crate::points::PointSet;
use crate::rng::{derive_seed, derive_seed2, rng_from, shuffled_indices, stream};

pub(crate) fn run_online(
    points: &PointSet,
    k: usize,
    cfg: &AsgConfig,
    init: &Initializer,
    seed: u64,
) -> Result<ClusteringResult> {
    check_k(points, k)?;
    cfg.validate()?;
    let mut init_rng = rng_from(derive_seed(seed, stream::INIT));
    let start = init.centers(points, k, &mut init_rng)?;
    let mut clusters: Vec<AsgState> = start.into_centers().into_iter().map(AsgState::new).collect();

    let mut order_rng = rng_from(derive_seed2(seed, stream::ORDER, 0));
    let mut averages: Vec<Vec<f64>> = clusters.iter().map(|c| c.average.clone()).collect();
    for i in shuffled_indices(points.len(), &mut order_rng) {
        let x = points.row(i);
        let (r, _) = nearest_center(&averages, x);
        clusters[r].update(x, cfg);
        averages[r].copy_from_slice(&clusters[r].average);
    }
    finish(points, averages, 1, 1, Algorithm::Online)
}

/// Sequential K-medians: one shuffled pass, each point moving the
/// Robbins–Monro iterate of the cluster whose averaged center is nearest.
pub fn online_kmedians(
    points: &PointSet,
    k: usize,
    cfg: &AsgConfig,
    init: &InitMethod,
    seed: u64,
) -> Result<ClusteringResult> {
    let init = Initializer::prepare(points, init)?;
    run_online(points, k, cfg, &init, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomedian::asg_median;
    use crate::kmedians::{distortion_of, Codebook, DistortionNorm};

    #[test]
    fn one_cluster_reduces_to_asg() {
        let rows: Vec<[f64; 2]> = (0..300)
            .map(|i| {
                let t = i as f64;
                [(t * 0.7).sin() * 3.0, (t * 1.3).cos() + t * 0.01]
            })
            .collect();
        let p = PointSet::from_rows(&rows).unwrap();
        let cfg = AsgConfig::default();
        for seed in 0..5 {
            let online = online_kmedians(&p, 1, &cfg, &InitMethod::default(), seed).unwrap();
            let asg = asg_median(&p, &cfg, seed).unwrap();
            assert_eq!(online.codebook.center(0), &asg.point[..]);
        }
    }

    #[test]
    fn n_equals_k_does_not_increase_distortion() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [4.0, 1.0], [-3.0, 2.0], [1.0, -6.0]]).unwrap();
        for init in [InitMethod::default(), InitMethod::PlusPlusL1] {
            let start = crate::kmedians::init_centers(&p, 4, &init, 0).unwrap();
            let before = distortion_of(&p, start.centers(), DistortionNorm::L1);
            let r = online_kmedians(&p, 4, &AsgConfig::default(), &init, 0).unwrap();
            assert!(r.distortion <= before);
        }
        let shifted = InitMethod::Provided {
            centers: Codebook::new(vec![
                vec![0.5, 0.0],
                vec![4.0, 1.5],
                vec![-3.0, 2.5],
                vec![1.0, -5.0],
            ])
            .unwrap(),
        };
        let start = crate::kmedians::init_centers(&p, 4, &shifted, 0).unwrap();
        let before = distortion_of(&p, start.centers(), DistortionNorm::L1);
        let r = online_kmedians(&p, 4, &AsgConfig::default(), &shifted, 0).unwrap();
        assert!(r.distortion <= before, "{} > {before}", r.distortion);
    }
}
