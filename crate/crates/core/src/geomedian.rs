//! Geometric (L¹, spatial) median of a finite sample.
//!
//! Two estimators are provided: the Weiszfeld fixed-point iteration, which
//! re-weights every point by the inverse of its distance to the current
//! iterate, and an averaged Robbins–Monro stochastic gradient (ASG) that
//! streams through the sample once per pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{coordinate_median, dist, norm, PointSet};
use crate::rng::{derive_seed2, rng_from, shuffled_indices, stream};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Output of a median solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianEstimate {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Mean Euclidean distance from the sample to `point`.
    pub objective: f64,
}

/// Step schedule of the averaged stochastic gradient: `c_gamma / (j + 1)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsgConfig {
    pub c_gamma: f64,
    pub alpha: f64,
    pub passes: usize,
}

impl Default for AsgConfig {
    fn default() -> Self {
        Self {
            c_gamma: 1.0,
            alpha: 0.75,
            passes: 1,
        }
    }
}

impl AsgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_gamma > 0.0 && self.c_gamma.is_finite()) {
            return Err(Error::input(format!(
                "c_gamma must be positive, got {}",
                self.c_gamma
            )));
        }
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(Error::input(format!(
                "alpha must lie in (0.5, 1), got {}",
                self.alpha
            )));
        }
        if self.passes == 0 {
            return Err(Error::input("passes must be at least 1"));
        }
        Ok(())
    }
}

/// Mean Euclidean distance from `points` to `u`.
pub fn l1_objective(points: &PointSet, u: &[f64]) -> Result<f64> {
    points.check_nonempty()?;
    if u.len() != points.dim() {
        return Err(Error::input(format!(
            "point of dimension {} against data of dimension {}",
            u.len(),
            points.dim()
        )));
    }
    Ok(mean_distance(points.rows(), u))
}

pub(crate) fn mean_distance<'a>(rows: impl ExactSizeIterator<Item = &'a [f64]>, u: &[f64]) -> f64 {
    let n = rows.len();
    rows.map(|x| dist(x, u)).sum::<f64>() / n as f64
}

/// Weiszfeld iteration started from the coordinate-wise median.
pub fn weiszfeld_median(points: &PointSet, tol: f64, max_iter: usize) -> Result<MedianEstimate> {
    weiszfeld_observed(points, tol, max_iter, |_| {})
}

/// Every iterate visited by [`weiszfeld_median`], starting point first.
pub fn weiszfeld_path(points: &PointSet, tol: f64, max_iter: usize) -> Result<Vec<Vec<f64>>> {
    let mut path = Vec::new();
    weiszfeld_observed(points, tol, max_iter, |m| path.push(m.to_vec()))?;
    Ok(path)
}

fn weiszfeld_observed(
    points: &PointSet,
    tol: f64,
    max_iter: usize,
    observe: impl FnMut(&[f64]),
) -> Result<MedianEstimate> {
    points.check_nonempty()?;
    if !(tol > 0.0) {
        return Err(Error::input(format!("tol must be positive, got {tol}")));
    }
    let rows: Vec<&[f64]> = points.rows().collect();
    let start = weiszfeld_start(&rows, points.dim());
    let (point, iterations, converged) = weiszfeld_rows(&rows, start, tol, max_iter, observe);
    let objective = mean_distance(points.rows(), &point);
    Ok(MedianEstimate {
        point,
        iterations,
        converged,
        objective,
    })
}

/// Coordinate-wise median, the starting point of [`weiszfeld_median`].
pub(crate) fn weiszfeld_start(rows: &[&[f64]], dim: usize) -> Vec<f64> {
    coordinate_median(rows.iter().copied(), dim)
}

/// Core fixed-point loop over borrowed rows.
///
/// Returns `(point, iterations, converged)`. An iterate sitting on data
/// points of multiplicity `eta` takes the Vardi–Zhang step: with `r` the norm
/// of the summed unit vectors towards the other points, it is optimal when
/// `r <= eta`, and otherwise moves to `(1 - eta/r) T + (eta/r) y` where `T`
/// is the plain Weiszfeld map over the other points. A step that would raise
/// the objective through rounding is refused and the loop stops.
pub(crate) fn weiszfeld_rows(
    rows: &[&[f64]],
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(&[f64]),
) -> (Vec<f64>, usize, bool) {
    let (point, iterations, converged) = weiszfeld_loop(rows, start, tol, max_iter, &mut observe);
    // The iteration creeps towards an optimum sitting on a data point, so
    // finish with the nearest one when it does better.
    let nearest = rows
        .iter()
        .min_by(|a, b| dist(a, &point).total_cmp(&dist(b, &point)))
        .expect("non-empty");
    if *nearest != &point[..] {
        let here = rows.iter().map(|x| dist(x, &point)).sum::<f64>();
        let there = rows.iter().map(|x| dist(x, nearest)).sum::<f64>();
        if there < here {
            observe(nearest);
            return (nearest.to_vec(), iterations, converged);
        }
    }
    (point, iterations, converged)
}

fn weiszfeld_loop(
    rows: &[&[f64]],
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(&[f64]),
) -> (Vec<f64>, usize, bool) {
    let dim = start.len();
    let mut current = start;
    let mut next = vec![0.0; dim];
    let mut pull = vec![0.0; dim];
    observe(&current);
    for t in 0..max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        pull.iter_mut().for_each(|v| *v = 0.0);
        let mut weight_sum = 0.0;
        let mut eta = 0.0;
        for x in rows {
            let d = dist(x, &current);
            if d == 0.0 {
                eta += 1.0;
                continue;
            }
            let w = 1.0 / d;
            weight_sum += w;
            for ((acc, p), (xi, ci)) in next.iter_mut().zip(pull.iter_mut()).zip(x.iter().zip(&current)) {
                *acc += w * xi;
                *p += w * (xi - ci);
            }
        }
        if weight_sum == 0.0 {
            // every point equals the iterate
            return (current, t, true);
        }
        next.iter_mut().for_each(|v| *v /= weight_sum);
        if eta > 0.0 {
            let r = norm(&pull);
            if r <= eta {
                return (current, t, true);
            }
            let keep = eta / r;
            for (n, c) in next.iter_mut().zip(&current) {
                *n = (1.0 - keep) * *n + keep * c;
            }
            let before = rows.iter().map(|x| dist(x, &current)).sum::<f64>();
            let after = rows.iter().map(|x| dist(x, &next)).sum::<f64>();
            if after > before {
                return (current, t, true);
            }
        }
        let step = dist(&next, &current);
        let scale = 1.0 + norm(&current);
        std::mem::swap(&mut current, &mut next);
        observe(&current);
        if step <= tol * scale {
            return (current, t + 1, true);
        }
    }
    (current, max_iter, false)
}

/// Running state of an averaged Robbins–Monro median estimate.
///
/// `count` starts at one: the starting point is treated as the first
/// iterate of the average, so the first gradient step is
/// `c_gamma / 2^alpha`.
#[derive(Debug, Clone)]
pub(crate) struct AsgState {
    pub iterate: Vec<f64>,
    pub average: Vec<f64>,
    pub count: f64,
}

impl AsgState {
    pub fn new(start: Vec<f64>) -> Self {
        Self {
            average: start.clone(),
            iterate: start,
            count: 1.0,
        }
    }

    pub fn update(&mut self, x: &[f64], cfg: &AsgConfig) {
        let d = dist(x, &self.iterate);
        if d > 0.0 {
            let gamma = cfg.c_gamma / (self.count + 1.0).powf(cfg.alpha);
            let scale = gamma / d;
            for (m, xi) in self.iterate.iter_mut().zip(x) {
                *m += scale * (xi - *m);
            }
        }
        let n = self.count;
        for (a, m) in self.average.iter_mut().zip(&self.iterate) {
            *a = (n * *a + m) / (n + 1.0);
        }
        self.count += 1.0;
    }
}

/// Averaged stochastic gradient estimate started at the coordinate-wise median.
///
/// Each pass visits the sample in a fresh shuffled order; pass `p` uses the
/// permutation seeded by `derive_seed2(seed, ORDER, p)`.
pub fn asg_median(points: &PointSet, cfg: &AsgConfig, seed: u64) -> Result<MedianEstimate> {
    points.check_nonempty()?;
    cfg.validate()?;
    let start = coordinate_median(points.rows(), points.dim());
    let mut state = AsgState::new(start);
    for pass in 0..cfg.passes {
        let mut rng = rng_from(derive_seed2(seed, stream::ORDER, pass as u64));
        for i in shuffled_indices(points.len(), &mut rng) {
            state.update(points.row(i), cfg);
        }
    }
    let objective = mean_distance(points.rows(), &state.average);
    Ok(MedianEstimate {
        point: state.average,
        iterations: cfg.passes * points.len(),
        converged: true,
        objective,
    })
}
