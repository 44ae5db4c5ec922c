//! Synthetic benchmark data: identity-covariance Gaussian mixtures, the three
//! fixed scenarios, a ten-cluster sphere design, and replacement
//! contamination by heavy-tailed or uniform noise.

use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmedians::Codebook;
use crate::points::{norm, PointSet};
use crate::rng::{derive_seed, rng_from, shuffled_indices, stream, Rng};

/// Equal-weight mixture of `N(μ_j, I_d)` components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub centers: Codebook,
    pub points_per_cluster: usize,
}

impl MixtureSpec {
    pub fn dim(&self) -> usize {
        self.centers.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseLaw {
    /// Student t with `nu` degrees of freedom, i.i.d. per coordinate.
    Student { nu: u32 },
    /// Continuous uniform on `[a, b]`, i.i.d. per coordinate.
    Uniform { a: f64, b: f64 },
}

impl NoiseLaw {
    pub fn name(&self) -> String {
        match self {
            NoiseLaw::Student { nu } => format!("t{nu}"),
            NoiseLaw::Uniform { a, b } => format!("uniform[{a},{b}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    /// Fraction of points replaced, in `[0, 0.5]`.
    pub rho: f64,
    pub law: NoiseLaw,
}

impl ContaminationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.rho) {
            return Err(Error::input(format!("rho must lie in [0, 0.5], got {}", self.rho)));
        }
        match self.law {
            NoiseLaw::Student { nu } if nu == 0 => {
                Err(Error::input("Student degrees of freedom must be positive"))
            }
            NoiseLaw::Uniform { a, b } if !(a < b) => {
                Err(Error::input(format!("uniform law needs a < b, got [{a}, {b}]")))
            }
            _ => Ok(()),
        }
    }

    /// Number of points replaced in a sample of size `n`: `⌊ρ·n⌋`.
    pub fn count(&self, n: usize) -> usize {
        ((self.rho * n as f64) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub points: PointSet,
    /// Generating component; `None` for replaced (contaminated) points.
    pub true_labels: Vec<Option<usize>>,
    pub contaminated: Vec<bool>,
    pub true_centers: Option<Codebook>,
    /// Human-readable generation record.
    pub provenance: String,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of distinct true labels among uncontaminated points.
    pub fn k_true(&self) -> usize {
        let mut seen: Vec<usize> = self.true_labels.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn contaminated_count(&self) -> usize {
        self.contaminated.iter().filter(|&&c| c).count()
    }
}

/// `k` centers drawn uniformly on the sphere of the given radius in `ℝ^d`.
pub fn sphere_centers(k: usize, radius: f64, d: usize, seed: u64) -> Result<Codebook> {
    if d < 1 {
        return Err(Error::input("dimension must be at least 1"));
    }
    if !(radius > 0.0) {
        return Err(Error::input(format!("radius must be positive, got {radius}")));
    }
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let mut rng = rng_from(seed);
    let centers = (0..k)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let r = norm(&v);
            if r > 0.0 {
                break v.into_iter().map(|x| x * radius / r).collect();
            }
        })
        .collect();
    Codebook::new(centers)
}

pub fn sample_mixture(spec: &MixtureSpec, seed: u64) -> Result<LabeledDataset> {
    if spec.points_per_cluster == 0 {
        return Err(Error::input("points_per_cluster must be at least 1"));
    }
    let mut rng = rng_from(seed);
    let d = spec.dim();
    let k = spec.centers.k();
    let n = k * spec.points_per_cluster;
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (j, mu) in spec.centers.centers().iter().enumerate() {
        for _ in 0..spec.points_per_cluster {
            data.extend(mu.iter().map(|m| m + rng.sample::<f64, _>(StandardNormal)));
            labels.push(Some(j));
        }
    }
    Ok(LabeledDataset {
        points: PointSet::from_flat(d, data)?,
        true_labels: labels,
        contaminated: vec![false; n],
        true_centers: Some(spec.centers.clone()),
        provenance: format!(
            "gaussian mixture k={k} d={d} per_cluster={} seed={seed}",
            spec.points_per_cluster
        ),
    })
}

/// Benchmark designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// One cluster: uniform on the unit hypercube in dimension 10.
    S1,
    /// Four unit-variance clusters in dimension 3.
    S2,
    /// Five unit-variance clusters in dimension 4.
    S3,
    /// Ten unit-variance clusters in dimension 5, centers uniform on the
    /// radius-10 sphere and redrawn for every seed.
    Sphere10,
}

impl Scenario {
    pub fn k_true(self) -> usize {
        match self {
            Scenario::S1 => 1,
            Scenario::S2 => 4,
            Scenario::S3 => 5,
            Scenario::Sphere10 => 10,
        }
    }

    /// Points per cluster in the reference protocol.
    pub fn default_per_cluster(self) -> usize {
        match self {
            Scenario::S1 => 2000,
            _ => 500,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::S1 => "s1",
            Scenario::S2 => "s2",
            Scenario::S3 => "s3",
            Scenario::Sphere10 => "sphere10",
        }
    }

    /// Fixed generating centers (S2, S3 only).
    pub fn fixed_centers(self) -> Option<Codebook> {
        let rows: Vec<Vec<f64>> = match self {
            Scenario::S2 => vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, 2.0, 3.0],
                vec![3.0, 0.0, -1.0],
                vec![-3.0, -1.0, 0.0],
            ],
            Scenario::S3 => vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![3.0, 5.0, -1.0, 0.0],
                vec![-5.0, 0.0, 0.0, 0.0],
                vec![1.0, 1.0, 6.0, -2.0],
                vec![1.0, -3.0, -2.0, 5.0],
            ],
            _ => return None,
        };
        Some(Codebook::new(rows).expect("constant centers"))
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Scenario::S1),
            "s2" => Ok(Scenario::S2),
            "s3" => Ok(Scenario::S3),
            "sphere10" => Ok(Scenario::Sphere10),
            other => Err(Error::input(format!("unknown scenario '{other}'"))),
        }
    }
}

pub fn make_scenario(which: Scenario, seed: u64) -> LabeledDataset {
    make_scenario_sized(which, which.default_per_cluster(), seed)
        .expect("reference sizes are valid")
}

/// Scenario with a custom cluster size (total size for S1).
pub fn make_scenario_sized(which: Scenario, per_cluster: usize, seed: u64) -> Result<LabeledDataset> {
    if per_cluster == 0 {
        return Err(Error::input("per-cluster size must be at least 1"));
    }
    let mut data = match which {
        Scenario::S1 => {
            let mut rng = rng_from(derive_seed(seed, stream::SAMPLE));
            let d = 10;
            let coords = (0..per_cluster * d).map(|_| rng.random::<f64>()).collect();
            LabeledDataset {
                points: PointSet::from_flat(d, coords)?,
                true_labels: vec![Some(0); per_cluster],
                contaminated: vec![false; per_cluster],
                true_centers: Some(Codebook::new(vec![vec![0.5; d]])?),
                provenance: String::new(),
            }
        }
        Scenario::S2 | Scenario::S3 => {
            let spec = MixtureSpec {
                centers: which.fixed_centers().expect("fixed design"),
                points_per_cluster: per_cluster,
            };
            sample_mixture(&spec, derive_seed(seed, stream::SAMPLE))?
        }
        Scenario::Sphere10 => {
            let spec = MixtureSpec {
                centers: sphere_centers(10, 10.0, 5, derive_seed(seed, stream::CENTERS))?,
                points_per_cluster: per_cluster,
            };
            sample_mixture(&spec, derive_seed(seed, stream::SAMPLE))?
        }
    };
    data.provenance = format!(
        "scenario={} per_cluster={per_cluster} seed={seed}",
        which.name()
    );
    Ok(data)
}

fn draw(law: &NoiseLaw, rng: &mut Rng) -> f64 {
    match *law {
        NoiseLaw::Student { nu } => {
            let z: f64 = rng.sample(StandardNormal);
            let chi = ChiSquared::new(nu as f64).expect("positive degrees of freedom");
            let v: f64 = chi.sample(rng);
            z / (v / nu as f64).sqrt()
        }
        NoiseLaw::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
    }
}

/// `n` i.i.d. draws of `law`, exposed for distribution checks.
pub fn noise_sample(law: &NoiseLaw, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..n).map(|_| draw(law, &mut rng)).collect()
}

/// Replace `⌊ρ·n⌋` uniformly chosen points with noise vectors.
pub fn contaminate(
    data: &LabeledDataset,
    spec: &ContaminationSpec,
    seed: u64,
) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut out = data.clone();
    let m = spec.count(data.len());
    if m == 0 {
        return Ok(out);
    }
    let mut rng = rng_from(derive_seed(seed, stream::CONTAMINATION));
    let mut chosen = shuffled_indices(data.len(), &mut rng);
    chosen.truncate(m);
    chosen.sort_unstable();
    for &i in &chosen {
        for v in out.points.row_mut(i) {
            *v = draw(&spec.law, &mut rng);
        }
        out.true_labels[i] = None;
        out.contaminated[i] = true;
    }
    out.provenance = format!(
        "{}; contamination rho={} law={} seed={seed}",
        data.provenance,
        spec.rho,
        spec.law.name()
    );
    Ok(out)
}
