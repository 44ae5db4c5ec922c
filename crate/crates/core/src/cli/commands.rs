use std::path::Path;

use super::config::{
    ClusteringRun, ClusteringSummary, DataSource, DataSpec, DataSummary, EvaluateConfig,
    EvaluationSummary, ModelChoice, RunReport,
};
use super::io::{
    read_centers, read_data, read_labels, write_centers, write_dataset, write_labels, CsvOut,
};
use super::project::principal_scores;
use crate::error::{Error, Result};
use crate::evaluation::{ari_on_known, centroid_l1_error};
use crate::kmedians::{cluster, ClusteringResult};
use crate::selection::{select, DistortionCurve, SelectConfig, SelectionReport};
use crate::simulation::{contaminate, make_scenario_sized, LabeledDataset};

/// Data set described by `spec`, and whether true labels are known.
pub fn prepare_data(spec: &DataSpec, seed: u64) -> Result<(LabeledDataset, bool)> {
    let (data, has_truth) = match &spec.source {
        DataSource::File { path } => {
            let input = read_data(path)?;
            let has_truth = input.labels.is_some();
            (input.into_dataset(format!("file={}", path.display())), has_truth)
        }
        DataSource::Scenario {
            scenario,
            per_cluster,
        } => {
            let per = per_cluster.unwrap_or_else(|| scenario.default_per_cluster());
            (make_scenario_sized(*scenario, per, seed)?, true)
        }
    };
    let data = match &spec.contamination {
        Some(c) => contaminate(&data, c, seed)?,
        None => data,
    };
    Ok((data, has_truth))
}

fn data_summary(data: &LabeledDataset, has_truth: bool) -> DataSummary {
    DataSummary {
        n: data.len(),
        d: data.points.dim(),
        contaminated: data.contaminated_count(),
        k_true: has_truth.then(|| data.k_true()),
        provenance: data.provenance.clone(),
    }
}

fn evaluate_result(data: &LabeledDataset, has_truth: bool, r: &ClusteringResult) -> Result<Option<EvaluationSummary>> {
    if !has_truth {
        return Ok(None);
    }
    let known = data.true_labels.iter().flatten().count();
    let ari = if known >= 2 {
        Some(ari_on_known(&r.labels, &data.true_labels)?)
    } else {
        None
    };
    let centroid = match &data.true_centers {
        Some(t) => Some(centroid_l1_error(t, &r.codebook)?),
        None => None,
    };
    Ok(Some(EvaluationSummary {
        ari,
        centroid_l1_error: centroid,
        evaluated_points: known,
    }))
}

fn write_clustering(out: &Path, r: &ClusteringResult, report: &mut RunReport) -> Result<()> {
    write_labels(&out.join("labels.csv"), &r.labels)?;
    write_centers(&out.join("centers.csv"), &r.codebook)?;
    report.files.push("labels.csv".into());
    report.files.push("centers.csv".into());
    report.clustering = Some(ClusteringSummary::from(r));
    Ok(())
}

/// Cluster with a fixed `k`.
pub fn cmd_cluster(run: &ClusteringRun, seed: u64, out: &Path, report: &mut RunReport) -> Result<()> {
    let ModelChoice::FixedK { k } = run.model else {
        return Err(Error::Config("cluster needs a fixed k".into()));
    };
    let (data, has_truth) = prepare_data(&run.data, seed)?;
    report.data = Some(data_summary(&data, has_truth));
    let r = cluster(&data.points, k, run.algorithm, &run.params, seed)?;
    report.evaluation = evaluate_result(&data, has_truth, &r)?;
    write_clustering(out, &r, report)
}

/// Select `k` and cluster; with a fixed `k` this is [`cmd_cluster`].
pub fn cmd_select(run: &ClusteringRun, seed: u64, out: &Path, report: &mut RunReport) -> Result<()> {
    let ModelChoice::Select {
        method,
        k_max,
        min_window,
        gap_references,
        silhouette_metric,
    } = run.model
    else {
        return cmd_cluster(run, seed, out, report);
    };
    let (data, has_truth) = prepare_data(&run.data, seed)?;
    report.data = Some(data_summary(&data, has_truth));
    let cfg = SelectConfig {
        method,
        algorithm: run.algorithm,
        k_max,
        min_window,
        gap_references,
        silhouette_metric,
        params: run.params.clone(),
    };
    let selection = select(&data.points, &cfg, seed)?;
    report.evaluation = evaluate_result(&data, has_truth, &selection.chosen)?;
    write_clustering(out, &selection.chosen, report)?;

    write_curve(&out.join("curve.csv"), &selection.curve, &selection.report)?;
    report.files.push("curve.csv".into());
    if let Some(table) = &selection.report.window_table {
        let mut w = CsvOut::create(
            &out.join("slope_windows.csv"),
            &["window".into(), "slope".into(), "k_hat".into()],
        )?;
        for row in table {
            w.row(&[row.window.to_string(), row.slope.to_string(), row.k_hat.to_string()])?;
        }
        w.finish()?;
        report.files.push("slope_windows.csv".into());
    }
    write_projection(&out.join("projection.csv"), &data, has_truth, &selection.chosen.labels)?;
    report.files.push("projection.csv".into());
    report.selection = Some(selection.report);
    Ok(())
}

fn write_curve(path: &Path, curve: &DistortionCurve, report: &SelectionReport) -> Result<()> {
    let mut header = vec!["k".to_string(), "distortion".into(), "criterion".into()];
    if report.gap_sd.is_some() {
        header.push("gap_sd".into());
    }
    let mut w = CsvOut::create(path, &header)?;
    for (i, c) in report.criterion_values.iter().enumerate() {
        let distortion = curve
            .entries
            .iter()
            .find(|e| e.k == c.k)
            .map_or(String::new(), |e| e.distortion.to_string());
        let mut fields = vec![c.k.to_string(), distortion, c.value.to_string()];
        if let Some(sd) = &report.gap_sd {
            fields.push(sd[i].to_string());
        }
        w.row(&fields)?;
    }
    w.finish()
}

fn write_projection(path: &Path, data: &LabeledDataset, has_truth: bool, labels: &[usize]) -> Result<()> {
    let mut header = vec!["pc1".to_string(), "pc2".into(), "label".into()];
    if has_truth {
        header.push("true_label".into());
    }
    header.push("contaminated".into());
    let mut w = CsvOut::create(path, &header)?;
    for (i, s) in principal_scores(&data.points).iter().enumerate() {
        let mut fields = vec![s[0].to_string(), s[1].to_string(), labels[i].to_string()];
        if has_truth {
            fields.push(data.true_labels[i].map_or("-1".into(), |l| l.to_string()));
        }
        fields.push(if data.contaminated[i] { "1" } else { "0" }.into());
        w.row(&fields)?;
    }
    w.finish()
}

/// Generate a scenario data set and write it as `data.csv`.
pub fn cmd_simulate(data_spec: &DataSpec, seed: u64, out: &Path, report: &mut RunReport) -> Result<()> {
    let (data, has_truth) = prepare_data(data_spec, seed)?;
    write_dataset(&out.join("data.csv"), &data, data_spec.contamination.is_some())?;
    report.files.push("data.csv".into());
    report.data = Some(data_summary(&data, has_truth));
    Ok(())
}

/// Compare predicted labels (and optionally centers) with the truth.
pub fn cmd_evaluate(cfg: &EvaluateConfig, report: &mut RunReport) -> Result<()> {
    let truth = read_data(&cfg.truth)?;
    let labels = read_labels(&cfg.labels)?;
    if truth.labels.is_none() {
        return Err(Error::input("truth file has no 'label' column"));
    }
    if labels.len() != truth.points.len() {
        return Err(Error::input(format!(
            "{} predicted labels for {} points",
            labels.len(),
            truth.points.len()
        )));
    }
    let data = truth.into_dataset(format!("file={}", cfg.truth.display()));
    let known = &data.true_labels;
    let evaluated = known.iter().flatten().count();
    let ari = if evaluated >= 2 {
        Some(ari_on_known(&labels, known)?)
    } else {
        None
    };
    let centroid = match (&cfg.centers, &cfg.true_centers) {
        (Some(est), Some(tru)) => Some(centroid_l1_error(&read_centers(tru)?, &read_centers(est)?)?),
        (None, None) => None,
        _ => return Err(Error::Config("centroid error needs both center files".into())),
    };
    report.data = Some(data_summary(&data, true));
    report.evaluation = Some(EvaluationSummary {
        ari,
        centroid_l1_error: centroid,
        evaluated_points: evaluated,
    });
    Ok(())
}
