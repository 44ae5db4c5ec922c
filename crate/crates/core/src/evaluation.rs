//! Agreement with ground truth: adjusted Rand index, centroid error, and
//! aggregation of repeated trials.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmedians::Codebook;
use crate::points::{dist, median_of};

fn pairs(m: u64) -> u128 {
    let m = m as u128;
    m * m.saturating_sub(1) / 2
}

/// Hubert–Arabie adjusted Rand index between two labelings of the same points.
///
/// When the chance-corrected denominator vanishes (both labelings all
/// singletons, or both a single block) the partitions agree and 1 is returned.
pub fn adjusted_rand_index<A, B>(labels_a: &[A], labels_b: &[B]) -> Result<f64>
where
    A: Eq + std::hash::Hash,
    B: Eq + std::hash::Hash,
{
    if labels_a.len() != labels_b.len() {
        return Err(Error::input(format!(
            "label vectors differ in length ({} vs {})",
            labels_a.len(),
            labels_b.len()
        )));
    }
    let n = labels_a.len();
    if n < 2 {
        return Err(Error::input("ARI needs at least two points"));
    }
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        *table.entry((a, b)).or_insert(0) += 1;
        *rows.entry(a).or_insert(0) += 1;
        *cols.entry(b).or_insert(0) += 1;
    }
    // Exact integer arithmetic; scaled by 2·C(n,2) to clear the fractions.
    let sum_cells: u128 = table.values().map(|&m| pairs(m)).sum();
    let sum_rows: u128 = rows.values().map(|&m| pairs(m)).sum();
    let sum_cols: u128 = cols.values().map(|&m| pairs(m)).sum();
    let total = pairs(n as u64);
    let num = 2 * (sum_cells * total) as i128 - 2 * (sum_rows * sum_cols) as i128;
    let denom = ((sum_rows + sum_cols) * total) as i128 - 2 * (sum_rows * sum_cols) as i128;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / denom as f64)
}

/// Sum over estimated centers of the distance to the nearest true center.
pub fn centroid_l1_error(true_codebook: &Codebook, est_codebook: &Codebook) -> Result<f64> {
    if true_codebook.dim() != est_codebook.dim() {
        return Err(Error::input(format!(
            "codebook dimensions differ ({} vs {})",
            true_codebook.dim(),
            est_codebook.dim()
        )));
    }
    Ok(est_codebook
        .centers()
        .iter()
        .map(|c| {
            true_codebook
                .centers()
                .iter()
                .map(|t| dist(c, t))
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}

/// Outcome of one selection trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub k_hat: usize,
    pub ari: f64,
    pub l1_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    /// Trials with `k_hat == k_true`.
    pub n_correct: usize,
    pub k_bar: f64,
    pub ari_mean: f64,
    pub l1_error_median: f64,
    pub k_hat_median: f64,
}

pub fn summarize_trials(per_trial: &[TrialOutcome], k_true: usize) -> Result<TrialSummary> {
    if per_trial.is_empty() {
        return Err(Error::input("no trials to summarize"));
    }
    let t = per_trial.len() as f64;
    let mut errors: Vec<f64> = per_trial.iter().map(|o| o.l1_error).collect();
    let mut ks: Vec<f64> = per_trial.iter().map(|o| o.k_hat as f64).collect();
    Ok(TrialSummary {
        trials: per_trial.len(),
        n_correct: per_trial.iter().filter(|o| o.k_hat == k_true).count(),
        k_bar: ks.iter().sum::<f64>() / t,
        ari_mean: per_trial.iter().map(|o| o.ari).sum::<f64>() / t,
        l1_error_median: median_of(&mut errors),
        k_hat_median: median_of(&mut ks),
    })
}

/// ARI restricted to points whose truth is known (uncontaminated points).
pub fn ari_on_known(predicted: &[usize], truth: &[Option<usize>]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::input("label vectors differ in length"));
    }
    let (p, t): (Vec<usize>, Vec<usize>) = predicted
        .iter()
        .zip(truth)
        .filter_map(|(&p, t)| t.map(|t| (p, t)))
        .unzip();
    adjusted_rand_index(&p, &t)
}
