use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::genie::GenieTree;
use super::{check_k, Codebook};
use crate::error::{Error, Result};
use crate::points::{dist, PointSet};
use crate::rng::{rng_from, Rng};

pub const DEFAULT_GINI_THRESHOLD: f64 = 0.3;

/// How the starting centers are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitMethod {
    /// Gini-guarded single linkage cut at `k`, coordinate-wise median per cluster.
    RobustHierarchical { gini_threshold: f64 },
    /// D¹ seeding: probability proportional to the (unsquared) distance to
    /// the nearest chosen center.
    PlusPlusL1,
    Provided { centers: Codebook },
}

impl Default for InitMethod {
    fn default() -> Self {
        InitMethod::RobustHierarchical {
            gini_threshold: DEFAULT_GINI_THRESHOLD,
        }
    }
}

impl InitMethod {
    pub fn validate(&self) -> Result<()> {
        if let InitMethod::RobustHierarchical { gini_threshold } = self {
            if !(*gini_threshold > 0.0 && *gini_threshold <= 1.0) {
                return Err(Error::input(format!(
                    "gini_threshold must lie in (0, 1], got {gini_threshold}"
                )));
            }
        }
        Ok(())
    }
}

/// An [`InitMethod`] with its data-dependent precomputation done.
///
/// The hierarchy behind `RobustHierarchical` does not depend on `k`, so it is
/// built once per data set and cut as needed.
#[derive(Debug, Clone)]
pub enum Initializer {
    Hierarchy(GenieTree),
    PlusPlusL1,
    Provided(Codebook),
}

impl Initializer {
    pub fn prepare(points: &PointSet, method: &InitMethod) -> Result<Self> {
        points.check_nonempty()?;
        method.validate()?;
        Ok(match method {
            InitMethod::RobustHierarchical { gini_threshold } => {
                Initializer::Hierarchy(GenieTree::build(points, *gini_threshold))
            }
            InitMethod::PlusPlusL1 => Initializer::PlusPlusL1,
            InitMethod::Provided { centers } => {
                if centers.dim() != points.dim() {
                    return Err(Error::input(format!(
                        "provided centers have dimension {} but data has {}",
                        centers.dim(),
                        points.dim()
                    )));
                }
                Initializer::Provided(centers.clone())
            }
        })
    }

    /// Whether repeated calls can return different codebooks.
    pub fn is_random(&self) -> bool {
        matches!(self, Initializer::PlusPlusL1)
    }

    pub fn centers(&self, points: &PointSet, k: usize, rng: &mut Rng) -> Result<Codebook> {
        check_k(points, k)?;
        match self {
            Initializer::Hierarchy(tree) => {
                if tree.len() != points.len() {
                    return Err(Error::input("hierarchy was built for a different data set"));
                }
                Codebook::new(tree.centers(points, k))
            }
            Initializer::PlusPlusL1 => Ok(plus_plus_l1(points, k, rng)),
            Initializer::Provided(c) => {
                if c.k() != k {
                    return Err(Error::input(format!(
                        "{} centers provided but k = {k}",
                        c.k()
                    )));
                }
                Ok(c.clone())
            }
        }
    }
}

pub(crate) fn plus_plus_l1(points: &PointSet, k: usize, rng: &mut Rng) -> Codebook {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points.row(first).to_vec()];
    let mut nearest: Vec<f64> = points.rows().map(|x| dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every remaining point sits on a center
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        let c = points.row(pick).to_vec();
        for (w, x) in nearest.iter_mut().zip(points.rows()) {
            *w = w.min(dist(x, &c));
        }
        centers.push(c);
    }
    Codebook::new(centers).expect("centers drawn from finite data")
}

/// Starting codebook of size `k` for `points`.
pub fn init_centers(points: &PointSet, k: usize, method: &InitMethod, seed: u64) -> Result<Codebook> {
    Initializer::prepare(points, method)?.centers(points, k, &mut rng_from(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::coordinate_median;

    fn blobs_at(x1: f64, y1: f64) -> PointSet {
        let mut rows = Vec::new();
        for i in 0..50 {
            let t = i as f64 * 0.37;
            rows.push([t.sin(), t.cos()]);
            rows.push([x1 + t.cos(), y1 + t.sin()]);
        }
        PointSet::from_rows(&rows).unwrap()
    }

    fn blobs() -> PointSet {
        blobs_at(20.0, 5.0)
    }

    #[test]
    fn k_equals_n_returns_every_point() {
        let p = PointSet::from_rows(&[[0.0, 1.0], [3.0, 1.0], [-2.0, 7.0], [5.0, 5.0]]).unwrap();
        for method in [InitMethod::default(), InitMethod::PlusPlusL1] {
            let c = init_centers(&p, 4, &method, 3).unwrap();
            let mut got: Vec<Vec<f64>> = c.into_centers();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut want: Vec<Vec<f64>> = p.rows().map(<[f64]>::to_vec).collect();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got, want, "{method:?}");
        }
    }

    #[test]
    fn k_one_is_coordinate_median() {
        let p = blobs();
        let c = init_centers(&p, 1, &InitMethod::default(), 0).unwrap();
        assert_eq!(c.center(0), &coordinate_median(p.rows(), 2)[..]);
    }

    #[test]
    fn one_center_per_blob() {
        let p = blobs();
        let in_box = |c: &[f64], x0: f64, y0: f64| {
            (c[0] - x0).abs() <= 1.0 && (c[1] - y0).abs() <= 1.0
        };
        for seed in 0..20 {
            let c = init_centers(&p, 2, &InitMethod::default(), seed).unwrap();
            let a = c.centers().iter().filter(|c| in_box(c, 0.0, 0.0)).count();
            let b = c.centers().iter().filter(|c| in_box(c, 20.0, 5.0)).count();
            assert_eq!((a, b), (1, 1), "seed {seed}: {c:?}");
        }
        // D¹ seeding picks the same blob twice with probability about 1e-3 here
        let p = blobs_at(1000.0, 0.0);
        for seed in 0..20 {
            let c = init_centers(&p, 2, &InitMethod::PlusPlusL1, seed).unwrap();
            let a = c.centers().iter().filter(|c| in_box(c, 0.0, 0.0)).count();
            let b = c.centers().iter().filter(|c| in_box(c, 1000.0, 0.0)).count();
            assert_eq!((a, b), (1, 1), "seed {seed}: {c:?}");
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let p = PointSet::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(init_centers(&p, 3, &InitMethod::default(), 0).is_err());
        assert!(init_centers(&p, 0, &InitMethod::PlusPlusL1, 0).is_err());
        let wrong_dim = InitMethod::Provided {
            centers: Codebook::new(vec![vec![0.0, 0.0]]).unwrap(),
        };
        assert!(init_centers(&p, 1, &wrong_dim, 0).is_err());
        let bad_gini = InitMethod::RobustHierarchical { gini_threshold: 0.0 };
        assert!(init_centers(&p, 1, &bad_gini, 0).is_err());
    }

    #[test]
    fn provided_passes_through() {
        let p = PointSet::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let centers = Codebook::new(vec![vec![0.5], vec![1.5]]).unwrap();
        let got = init_centers(&p, 2, &InitMethod::Provided { centers: centers.clone() }, 0).unwrap();
        assert_eq!(got, centers);
    }

    #[test]
    fn duplicates_do_not_stall_seeding() {
        let p = PointSet::from_rows(&[[1.0, 1.0]; 5]).unwrap();
        let c = init_centers(&p, 5, &InitMethod::PlusPlusL1, 11).unwrap();
        assert_eq!(c.k(), 5);
    }
}
