//! Repeated-trial benchmark over scenarios, contamination levels,
//! algorithms and selection methods.

use std::path::Path;

use rayon::prelude::*;

use super::config::{BenchConfig, BenchRow, RunReport};
use super::io::CsvOut;
use crate::error::{Error, Result};
use crate::evaluation::{ari_on_known, centroid_l1_error, summarize_trials, TrialOutcome};
use crate::kmedians::Algorithm;
use crate::rng::{derive_seed2, stream};
use crate::selection::{select, SelectConfig, SelectionMethod};
use crate::simulation::{contaminate, make_scenario_sized, ContaminationSpec, Scenario};

/// One (scenario, rho, algorithm, method, trial) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: Scenario,
    pub rho: f64,
    pub algorithm: Algorithm,
    pub method: SelectionMethod,
    pub trial: usize,
    pub outcome: TrialOutcome,
}

/// Seed of trial `t`: data, contamination and clustering all derive from it.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    derive_seed2(seed, stream::TRIAL, t as u64)
}

/// Run every trial. Records come back in loop order (scenario, trial, rho,
/// algorithm, method) whatever the thread count.
pub fn run_trials(cfg: &BenchConfig, seed: u64) -> Result<Vec<TrialRecord>> {
    let jobs: Vec<(Scenario, usize)> = cfg
        .scenarios
        .iter()
        .flat_map(|&s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let nested: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(scenario, trial)| run_one(cfg, scenario, trial, seed))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn run_one(cfg: &BenchConfig, scenario: Scenario, trial: usize, seed: u64) -> Result<Vec<TrialRecord>> {
    let tseed = trial_seed(seed, trial);
    let base = make_scenario_sized(scenario, cfg.sizes.per_cluster(scenario), tseed)?;
    let truth_centers = base
        .true_centers
        .clone()
        .ok_or_else(|| Error::input("scenario without true centers"))?;
    let mut records = Vec::new();
    for &rho in &cfg.rhos {
        let data = contaminate(&base, &ContaminationSpec { rho, law: cfg.law }, tseed)?;
        for &algorithm in &cfg.algorithms {
            for &method in &cfg.methods {
                let sel_cfg = SelectConfig {
                    method,
                    algorithm,
                    k_max: cfg.k_max,
                    min_window: cfg.min_window,
                    gap_references: cfg.gap_references,
                    silhouette_metric: cfg.silhouette_metric,
                    params: cfg.params.clone(),
                };
                let s = select(&data.points, &sel_cfg, tseed)?;
                records.push(TrialRecord {
                    scenario,
                    rho,
                    algorithm,
                    method,
                    trial,
                    outcome: TrialOutcome {
                        k_hat: s.report.k_hat,
                        ari: ari_on_known(&s.chosen.labels, &data.true_labels)?,
                        l1_error: centroid_l1_error(&truth_centers, &s.chosen.codebook)?,
                    },
                });
            }
        }
    }
    Ok(records)
}

/// Aggregate records per (scenario, rho, algorithm, method), in config order.
pub fn summarize(cfg: &BenchConfig, records: &[TrialRecord]) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &scenario in &cfg.scenarios {
        for &rho in &cfg.rhos {
            for &algorithm in &cfg.algorithms {
                for &method in &cfg.methods {
                    let outcomes: Vec<TrialOutcome> = records
                        .iter()
                        .filter(|r| {
                            r.scenario == scenario
                                && r.rho == rho
                                && r.algorithm == algorithm
                                && r.method == method
                        })
                        .map(|r| r.outcome)
                        .collect();
                    rows.push(BenchRow {
                        scenario,
                        law: cfg.law.name(),
                        rho,
                        algorithm,
                        method,
                        k_true: scenario.k_true(),
                        summary: summarize_trials(&outcomes, scenario.k_true())?,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn cmd_bench(cfg: &BenchConfig, seed: u64, out: &Path, report: &mut RunReport) -> Result<()> {
    let records = run_trials(cfg, seed)?;
    let rows = summarize(cfg, &records)?;
    let law = cfg.law.name();

    let mut w = CsvOut::create(
        &out.join("trials.csv"),
        &strings(&["scenario", "law", "rho", "algorithm", "method", "trial", "k_hat", "ari", "l1_error"]),
    )?;
    for r in &records {
        w.row(&[
            r.scenario.name().to_string(),
            law.clone(),
            r.rho.to_string(),
            r.algorithm.name().into(),
            r.method.name().into(),
            r.trial.to_string(),
            r.outcome.k_hat.to_string(),
            r.outcome.ari.to_string(),
            r.outcome.l1_error.to_string(),
        ])?;
    }
    w.finish()?;

    let mut w = CsvOut::create(
        &out.join("summary.csv"),
        &strings(&[
            "scenario", "law", "rho", "algorithm", "method", "k_true", "trials", "n_correct",
            "k_bar", "ari_mean", "k_hat_median", "l1_error_median",
        ]),
    )?;
    for r in &rows {
        let s = &r.summary;
        w.row(&[
            r.scenario.name().to_string(),
            r.law.clone(),
            r.rho.to_string(),
            r.algorithm.name().into(),
            r.method.name().into(),
            r.k_true.to_string(),
            s.trials.to_string(),
            s.n_correct.to_string(),
            s.k_bar.to_string(),
            s.ari_mean.to_string(),
            s.k_hat_median.to_string(),
            s.l1_error_median.to_string(),
        ])?;
    }
    w.finish()?;

    write_selection_table(&out.join("table_selection.csv"), cfg, &rows)?;
    write_contamination_table(&out.join("table_contamination.csv"), cfg, &rows)?;
    report.files.extend(
        ["trials.csv", "summary.csv", "table_selection.csv", "table_contamination.csv"]
            .map(String::from),
    );
    report.bench = Some(rows);
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn find(
    rows: &[BenchRow],
    scenario: Scenario,
    rho: f64,
    algorithm: Algorithm,
    method: SelectionMethod,
) -> &BenchRow {
    rows.iter()
        .find(|r| r.scenario == scenario && r.rho == rho && r.algorithm == algorithm && r.method == method)
        .expect("every combination is summarized")
}

/// Correct-selection count and median `k̂` per scenario, one row per
/// (method, algorithm), at the first contamination level.
fn write_selection_table(path: &Path, cfg: &BenchConfig, rows: &[BenchRow]) -> Result<()> {
    let rho = cfg.rhos[0];
    let mut header = strings(&["method", "algorithm"]);
    for s in &cfg.scenarios {
        header.push(format!("{}_n_correct", s.name()));
        header.push(format!("{}_k_hat_median", s.name()));
    }
    let mut w = CsvOut::create(path, &header)?;
    for &method in &cfg.methods {
        for &algorithm in &cfg.algorithms {
            let mut fields = vec![method.name().to_string(), algorithm.name().into()];
            for &s in &cfg.scenarios {
                let r = find(rows, s, rho, algorithm, method);
                fields.push(r.summary.n_correct.to_string());
                fields.push(r.summary.k_hat_median.to_string());
            }
            w.row(&fields)?;
        }
    }
    w.finish()
}

/// Mean `k̂` and mean ARI against the contamination level.
fn write_contamination_table(path: &Path, cfg: &BenchConfig, rows: &[BenchRow]) -> Result<()> {
    let mut header = strings(&["scenario", "law", "method", "algorithm", "metric"]);
    header.extend(cfg.rhos.iter().map(|r| format!("rho={r}")));
    let mut w = CsvOut::create(path, &header)?;
    for &s in &cfg.scenarios {
        for &method in &cfg.methods {
            for metric in ["k_bar", "ari_mean"] {
                for &algorithm in &cfg.algorithms {
                    let mut fields = vec![
                        s.name().to_string(),
                        cfg.law.name(),
                        method.name().into(),
                        algorithm.name().into(),
                        metric.into(),
                    ];
                    for &rho in &cfg.rhos {
                        let r = &find(rows, s, rho, algorithm, method).summary;
                        let v = if metric == "k_bar" { r.k_bar } else { r.ari_mean };
                        fields.push(v.to_string());
                    }
                    w.row(&fields)?;
                }
            }
        }
    }
    w.finish()
}
