//! End-to-end checks of the `kmedians` binary and its in-process entry point.

use std::path::{Path, PathBuf};
use std::process::Command;

use robust_kmedians::cli::io::{read_centers, read_data, read_labels};
use robust_kmedians::cli::{main_with_args, RunReport};
use robust_kmedians::evaluation::adjusted_rand_index;
use robust_kmedians::geomedian::{weiszfeld_median, DEFAULT_MAX_ITER, DEFAULT_TOL};
use robust_kmedians::points::dist;
use robust_kmedians::simulation::Scenario;

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["kmedians"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(dir: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_two_blobs(path: &Path) {
    let mut text = String::from("x,y,label\n");
    for i in 0..30 {
        let t = i as f64 * 0.1;
        text.push_str(&format!("{},{},0\n", -10.0 + t.sin(), t.cos()));
        text.push_str(&format!("{},{},1\n", 10.0 + t.cos(), t.sin()));
    }
    std::fs::write(path, text).unwrap();
}

fn simulated(dir: &Path, scenario: &str, per_cluster: &str) -> PathBuf {
    let out = dir.join(format!("sim_{scenario}"));
    assert_eq!(run(&["simulate", "--scenario", scenario, "--per-cluster", per_cluster, "--seed", "3", "--out", s(&out)]), 0);
    out.join("data.csv")
}

#[test]
fn cluster_separates_two_blobs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("blobs.csv");
    write_two_blobs(&data);
    for algorithm in ["offline", "semi_online", "online", "kmeans"] {
        let out = tmp.path().join(algorithm);
        assert_eq!(run(&["cluster", "--input", s(&data), "--k", "2", "--algorithm", algorithm, "--out", s(&out)]), 0);
        let labels = read_labels(&out.join("labels.csv")).unwrap();
        let truth: Vec<usize> = (0..60).map(|i| i % 2).collect();
        assert_eq!(adjusted_rand_index(&labels, &truth).unwrap(), 1.0, "{algorithm}");
        assert_eq!(read_centers(&out.join("centers.csv")).unwrap().k(), 2);
        assert_eq!(report(&out).evaluation.unwrap().ari, Some(1.0));
    }
}

#[test]
fn single_center_is_the_geometric_median() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("blobs.csv");
    write_two_blobs(&data);
    let out = tmp.path().join("k1");
    assert_eq!(run(&["cluster", "--input", s(&data), "--k", "1", "--out", s(&out)]), 0);
    let center = read_centers(&out.join("centers.csv")).unwrap();
    let points = read_data(&data).unwrap().points;
    let m = weiszfeld_median(&points, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(dist(center.center(0), &m.point) < 1e-9);
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let bin = env!("CARGO_BIN_EXE_kmedians");
    let out = Command::new(bin)
        .args(["cluster", "--input", s(&empty), "--k", "2", "--out", s(&tmp.path().join("o"))])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1"));

    let garbled = tmp.path().join("garbled.csv");
    std::fs::write(&garbled, "x,y\n1,2\n3,oops\n").unwrap();
    let out = Command::new(bin)
        .args(["cluster", "--input", s(&garbled), "--k", "1", "--out", s(&tmp.path().join("o"))])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));

    assert_eq!(run(&["cluster", "--input", s(&tmp.path().join("missing.csv")), "--k", "2", "--out", s(&tmp.path().join("o"))]), 6);
    let small = tmp.path().join("small.csv");
    std::fs::write(&small, "x\n1\n2\n").unwrap();
    assert_eq!(run(&["cluster", "--input", s(&small), "--k", "3", "--out", s(&tmp.path().join("o"))]), 3);
    assert_eq!(run(&["cluster", "--k", "2"]), 5);
    assert_eq!(run(&["cluster", "--bogus"]), 2);
}

#[test]
fn select_recovers_four_clusters() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulated(tmp.path(), "s2", "200");
    let out = tmp.path().join("sel");
    assert_eq!(run(&["select", "--input", s(&data), "--k-max", "12", "--out", s(&out)]), 0);
    let r = report(&out);
    assert_eq!(r.selection.unwrap().k_hat, 4);
    for f in ["curve.csv", "slope_windows.csv", "projection.csv", "labels.csv", "centers.csv"] {
        assert!(out.join(f).exists(), "{f}");
        assert!(r.files.iter().any(|x| x == f), "{f}");
    }
    let curve = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 13);
}

#[test]
fn select_without_method_equals_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulated(tmp.path(), "s3", "40");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&["select", "--input", s(&data), "--method", "none", "--k", "5", "--seed", "2", "--out", s(&a)]), 0);
    assert_eq!(run(&["cluster", "--input", s(&data), "--k", "5", "--seed", "2", "--out", s(&b)]), 0);
    for f in ["labels.csv", "centers.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_writes_labelled_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    assert_eq!(run(&["simulate", "--scenario", "s3", "--out", s(&out)]), 0);
    let text = std::fs::read_to_string(out.join("data.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4,label"));
    assert_eq!(lines.count(), Scenario::S3.default_per_cluster() * 5);

    let dirty = tmp.path().join("dirty");
    assert_eq!(run(&["simulate", "--scenario", "s2", "--per-cluster", "50", "--rho", "0.1", "--law", "uniform", "--out", s(&dirty)]), 0);
    let input = read_data(&dirty.join("data.csv")).unwrap();
    let mask = input.contaminated.unwrap();
    assert_eq!(mask.iter().filter(|&&c| c).count(), 20);
    let labels = input.labels.unwrap();
    assert!(mask.iter().zip(&labels).all(|(&c, l)| c == l.is_none()));
}

#[test]
fn config_replay_reproduces_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    assert_eq!(
        run(&["select", "--scenario", "s2", "--per-cluster", "50", "--rho", "0.05", "--k-max", "8", "--seed", "21", "--out", s(&first)]),
        0
    );
    let cfg = first.join("report.json");
    assert_eq!(run(&["select", "--config", s(&cfg), "--out", s(&second)]), 0);
    for f in ["report.json", "labels.csv", "curve.csv"] {
        assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap(), "{f}");
    }
    // a config for another command is rejected
    assert_eq!(run(&["cluster", "--config", s(&cfg), "--out", s(&tmp.path().join("x"))]), 5);
}

#[test]
fn report_round_trips_through_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sel");
    assert_eq!(run(&["select", "--scenario", "s3", "--per-cluster", "30", "--method", "gap", "--k-max", "4", "--references", "3", "--out", s(&out)]), 0);
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    let parsed: RunReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, text);
    assert!(parsed.selection.unwrap().gap_sd.is_some());
}

#[test]
fn bench_writes_one_row_per_combination() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench");
    assert_eq!(
        run(&[
            "bench", "--scenario", "s2", "--trials", "2", "--per-cluster", "30", "--k-max", "8",
            "--algorithm", "offline,kmeans", "--rho", "0,0.1", "--out", s(&out),
        ]),
        0
    );
    let rows = report(&out).bench.unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.summary.trials, 2);
        assert!(r.summary.n_correct <= 2);
        assert!((1.0..=8.0).contains(&r.summary.k_bar));
        assert!((-1.0..=1.0).contains(&r.summary.ari_mean));
    }
    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 2 * 2);
    let table = std::fs::read_to_string(out.join("table_contamination.csv")).unwrap();
    assert!(table.lines().next().unwrap().ends_with("rho=0,rho=0.1"));
}

#[test]
fn evaluate_scores_supplied_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("blobs.csv");
    write_two_blobs(&data);
    let labels = tmp.path().join("labels.csv");
    let mut text = String::from("index,label\n");
    for i in 0..60 {
        text.push_str(&format!("{i},{}\n", 1 - i % 2));
    }
    std::fs::write(&labels, text).unwrap();
    let out = tmp.path().join("eval");
    assert_eq!(run(&["evaluate", "--input", s(&data), "--labels", s(&labels), "--out", s(&out)]), 0);
    let e = report(&out).evaluation.unwrap();
    assert_eq!(e.ari, Some(1.0));
    assert_eq!(e.evaluated_points, 60);
}
