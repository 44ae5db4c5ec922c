//! K-medians clustering.
//!
//! Three variants share one assignment rule and one distortion functional:
//!
//! * `Offline`: Lloyd iteration whose M-step is a Weiszfeld geometric median.
//! * `SemiOnline`: Lloyd iteration whose M-step is one averaged stochastic
//!   gradient pass over the cluster, warm-started at the previous center.
//! * `Online`: a single sequential pass, each point moving only the center
//!   (of the averaged set) nearest to it.
//!
//! A squared-distance K-means baseline runs through the same Lloyd loop with
//! an arithmetic-mean M-step.

mod genie;
mod init;
mod lloyd;
mod online;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomedian::{AsgConfig, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::points::{sq_dist, PointSet};

pub use genie::GenieTree;
pub use init::{init_centers, InitMethod, Initializer, DEFAULT_GINI_THRESHOLD};
pub use lloyd::{kmeans_baseline, lloyd_kmedians, MedianBackend};
pub use online::online_kmedians;

pub const DEFAULT_LLOYD_MAX_ITER: usize = 100;
pub const DEFAULT_N_START: usize = 5;

/// Ordered list of `k ≥ 1` centers of a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Codebook {
    centers: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        let dim = centers
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::input("codebook is empty"))?;
        if dim == 0 {
            return Err(Error::input("codebook centers have dimension 0"));
        }
        for (j, c) in centers.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::input(format!(
                    "center {j} has dimension {} but expected {dim}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("center {j} is not finite")));
            }
        }
        Ok(Self { centers })
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j]
    }

    pub fn into_centers(self) -> Vec<Vec<f64>> {
        self.centers
    }

    /// Index and squared distance of the nearest center; ties go to the lowest index.
    #[inline]
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        nearest_center(&self.centers, x)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Codebook {
    type Error = Error;
    fn try_from(centers: Vec<Vec<f64>>) -> Result<Self> {
        Codebook::new(centers)
    }
}

impl From<Codebook> for Vec<Vec<f64>> {
    fn from(c: Codebook) -> Self {
        c.centers
    }
}

#[inline]
pub(crate) fn nearest_center(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    (best, best_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Offline,
    SemiOnline,
    Online,
    Kmeans,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Offline,
        Algorithm::SemiOnline,
        Algorithm::Online,
        Algorithm::Kmeans,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Offline => "offline",
            Algorithm::SemiOnline => "semi_online",
            Algorithm::Online => "online",
            Algorithm::Kmeans => "kmeans",
        }
    }

    /// Distortion the algorithm minimizes.
    pub fn norm(self) -> DistortionNorm {
        match self {
            Algorithm::Kmeans => DistortionNorm::SquaredL2,
            _ => DistortionNorm::L1,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "offline" => Ok(Algorithm::Offline),
            "semi_online" | "semionline" => Ok(Algorithm::SemiOnline),
            "online" => Ok(Algorithm::Online),
            "kmeans" | "k_means" => Ok(Algorithm::Kmeans),
            other => Err(Error::input(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionNorm {
    L1,
    SquaredL2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub codebook: Codebook,
    pub labels: Vec<usize>,
    /// Empirical L¹ distortion, or mean squared distance for K-means.
    pub distortion: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub algorithm: Algorithm,
}

impl ClusteringResult {
    pub fn k(&self) -> usize {
        self.codebook.k()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Nearest-center label of every point.
pub fn assign(points: &PointSet, codebook: &Codebook) -> Result<Vec<usize>> {
    check_dims(points, codebook)?;
    Ok(points.rows().map(|x| codebook.nearest(x).0).collect())
}

/// `(1/n) Σ min_j ‖x_i − c_j‖` (L1) or `(1/n) Σ min_j ‖x_i − c_j‖²` (SquaredL2).
pub fn empirical_distortion(
    points: &PointSet,
    codebook: &Codebook,
    norm: DistortionNorm,
) -> Result<f64> {
    points.check_nonempty()?;
    check_dims(points, codebook)?;
    Ok(distortion_of(points, codebook.centers(), norm))
}

pub(crate) fn distortion_of(points: &PointSet, centers: &[Vec<f64>], norm: DistortionNorm) -> f64 {
    let total: f64 = points
        .rows()
        .map(|x| {
            let d2 = nearest_center(centers, x).1;
            match norm {
                DistortionNorm::L1 => d2.sqrt(),
                DistortionNorm::SquaredL2 => d2,
            }
        })
        .sum();
    total / points.len() as f64
}

fn check_dims(points: &PointSet, codebook: &Codebook) -> Result<()> {
    if points.dim() != codebook.dim() {
        return Err(Error::input(format!(
            "codebook dimension {} does not match data dimension {}",
            codebook.dim(),
            points.dim()
        )));
    }
    Ok(())
}

pub(crate) fn check_k(points: &PointSet, k: usize) -> Result<()> {
    points.check_nonempty()?;
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::input(format!(
            "k = {k} exceeds the number of points n = {}",
            points.len()
        )));
    }
    Ok(())
}

/// Hyperparameters shared by every clustering variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub init: InitMethod,
    /// Cap on Lloyd iterations.
    pub max_iter: usize,
    /// Restarts for the Lloyd-style algorithms; the online variant always runs once.
    pub n_start: usize,
    pub weiszfeld_tol: f64,
    pub weiszfeld_max_iter: usize,
    pub asg: AsgConfig,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            init: InitMethod::default(),
            max_iter: DEFAULT_LLOYD_MAX_ITER,
            n_start: DEFAULT_N_START,
            weiszfeld_tol: DEFAULT_TOL,
            weiszfeld_max_iter: DEFAULT_MAX_ITER,
            asg: AsgConfig::default(),
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        self.asg.validate()?;
        if self.max_iter == 0 {
            return Err(Error::input("max_iter must be at least 1"));
        }
        if self.n_start == 0 {
            return Err(Error::input("n_start must be at least 1"));
        }
        if !(self.weiszfeld_tol > 0.0) {
            return Err(Error::input("weiszfeld_tol must be positive"));
        }
        self.init.validate()
    }
}

/// Run `algorithm` with `k` clusters.
pub fn cluster(
    points: &PointSet,
    k: usize,
    algorithm: Algorithm,
    params: &ClusterParams,
    seed: u64,
) -> Result<ClusteringResult> {
    params.validate()?;
    let init = Initializer::prepare(points, &params.init)?;
    cluster_prepared(points, k, algorithm, params, &init, seed)
}

/// Like [`cluster`] with an initializer built once and shared across calls.
pub fn cluster_prepared(
    points: &PointSet,
    k: usize,
    algorithm: Algorithm,
    params: &ClusterParams,
    init: &Initializer,
    seed: u64,
) -> Result<ClusteringResult> {
    match algorithm {
        Algorithm::Offline => lloyd::run_lloyd(
            points,
            k,
            lloyd::CenterUpdate::Weiszfeld {
                tol: params.weiszfeld_tol,
                max_iter: params.weiszfeld_max_iter,
            },
            init,
            params.max_iter,
            params.n_start,
            seed,
            algorithm,
        ),
        Algorithm::SemiOnline => lloyd::run_lloyd(
            points,
            k,
            lloyd::CenterUpdate::Asg(params.asg),
            init,
            params.max_iter,
            params.n_start,
            seed,
            algorithm,
        ),
        Algorithm::Kmeans => lloyd::run_lloyd(
            points,
            k,
            lloyd::CenterUpdate::Mean,
            init,
            params.max_iter,
            params.n_start,
            seed,
            algorithm,
        ),
        Algorithm::Online => online::run_online(points, k, &params.asg, init, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cb(rows: &[[f64; 2]]) -> Codebook {
        Codebook::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn assign_examples() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [10.0, 0.0]]).unwrap();
        assert_eq!(assign(&p, &cb(&[[0.0, 0.0], [10.0, 0.0]])).unwrap(), vec![0, 1]);

        let p = PointSet::from_rows(&[[5.0, 0.0]]).unwrap();
        assert_eq!(assign(&p, &cb(&[[0.0, 0.0], [10.0, 0.0]])).unwrap(), vec![0]);

        let p = PointSet::from_rows(&[[1.0, 2.0], [-4.0, 0.5], [9.0, 9.0]]).unwrap();
        assert_eq!(assign(&p, &cb(&[[100.0, 100.0]])).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn codebook_validation() {
        assert!(Codebook::new(vec![]).is_err());
        assert!(Codebook::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Codebook::new(vec![vec![f64::INFINITY]]).is_err());
        let p = PointSet::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(assign(&p, &Codebook::new(vec![vec![0.0]]).unwrap()).is_err());
    }

    #[test]
    fn distortion_examples() {
        let p = PointSet::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let c = cb(&[[0.0, 0.0]]);
        assert_eq!(empirical_distortion(&p, &c, DistortionNorm::L1).unwrap(), 1.0);
        assert_eq!(empirical_distortion(&p, &c, DistortionNorm::SquaredL2).unwrap(), 2.0);

        let c = cb(&[[0.0, 0.0], [2.0, 0.0]]);
        assert_eq!(empirical_distortion(&p, &c, DistortionNorm::L1).unwrap(), 0.0);

        let empty = PointSet::from_flat(2, vec![]).unwrap();
        assert!(empirical_distortion(&empty, &c, DistortionNorm::L1).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.name()));
        }
        assert!("kmedoids".parse::<Algorithm>().is_err());
    }

    #[test]
    fn codebook_serde_validates() {
        let c: Codebook = serde_json::from_str("[[1.0,2.0],[3.0,4.0]]").unwrap();
        assert_eq!(c.k(), 2);
        assert!(serde_json::from_str::<Codebook>("[[1.0],[3.0,4.0]]").is_err());
    }
}
