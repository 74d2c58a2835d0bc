mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::fixture_path;
use lmnet::{Dataset, Model, Role};

fn lmnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmnet")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fx(name: &str) -> String {
    fixture_path(name).to_str().unwrap().to_owned()
}

fn quick_search(out: &Path) -> Output {
    lmnet(&[
        "search",
        "--train-csv",
        &fx("table1_reconstructed.csv"),
        "--validation-csv",
        &fx("table2_validation.csv"),
        "--out-dir",
        out.to_str().unwrap(),
        "--hidden-range",
        "15,15",
        "--restarts",
        "1",
    ])
}

#[test]
fn search_writes_scan_and_reloadable_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_search(dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("selected h=15 train_mse="));
    assert!(stdout(&o).contains("validation_mse="));

    let scan = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let lines: Vec<&str> = scan.lines().collect();
    assert_eq!(lines[0], "hidden,train_mse,validation_mse,seed");
    assert_eq!(lines.len(), 2);

    let snap = dir.path().join("model.snapshot");
    let a = Model::load(&snap).unwrap();
    let resaved = dir.path().join("again.snapshot");
    a.save(&resaved).unwrap();
    assert_eq!(fs::read(&snap).unwrap(), fs::read(&resaved).unwrap());
    let b = Model::load(&resaved).unwrap();
    let v = Dataset::parse_csv(
        &fs::read_to_string(fixture_path("table2_validation.csv")).unwrap(),
        Role::Validation,
    )
    .unwrap();
    for (x, y) in a.predict_all(&v).iter().zip(b.predict_all(&v)) {
        assert_eq!(x.sigma_m.to_bits(), y.sigma_m.to_bits());
        assert_eq!(x.eps_m.to_bits(), y.eps_m.to_bits());
    }
}

#[test]
fn search_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(quick_search(a.path()).status.success());
    assert!(quick_search(b.path()).status.success());
    for f in ["scan.csv", "model.snapshot"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn missing_training_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = lmnet(&[
        "train",
        "--train-csv",
        missing.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = lmnet(&["train", "--hiden", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_with_tabulated_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmnet(&[
        "validate",
        "--validation-csv",
        &fx("table2_validation.csv"),
        "--simulated-csv",
        &fx("table2_reference_simulated.csv"),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "validation_mse=1.123500");
}

#[test]
fn empty_validation_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "layout,angle_deg,sigma_mpa,eps_pct\n").unwrap();
    let o = lmnet(&[
        "validate",
        "--validation-csv",
        empty.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty dataset"));
}

fn train_into(dir: &Path) {
    let o = lmnet(&[
        "train",
        "--train-csv",
        &fx("table1_reconstructed.csv"),
        "--out-dir",
        dir.to_str().unwrap(),
        "--hidden",
        "15",
        "--restarts",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("h=15 seed="));
}

#[test]
fn train_validate_recall_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    train_into(dir.path());
    let history = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert!(history.starts_with("epoch,sse,mu,accepted\n"));

    let o = lmnet(&[
        "validate",
        "--validation-csv",
        &fx("table2_validation.csv"),
        "--out-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("validation_report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 16);
    assert!(lines.iter().all(|l| l.split(',').count() == 12));

    let o = lmnet(&[
        "recall",
        "--recall-csv",
        &fx("table3_recall_inputs.csv"),
        "--train-csv",
        &fx("table1_reconstructed.csv"),
        "--out-dir",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recall = fs::read_to_string(dir.path().join("recall_report.csv")).unwrap();
    assert_eq!(recall.lines().count(), 37);
    assert_eq!(
        recall.lines().next().unwrap(),
        "no,layout,angle_deg,sigma_sim,eps_sim,group"
    );
    let groups = fs::read_to_string(dir.path().join("group_report.csv")).unwrap();
    assert_eq!(groups.lines().filter(|l| l.starts_with("G1,")).count(), 4);
    assert_eq!(groups.lines().filter(|l| l.starts_with("G3,")).count(), 6);

    let o = lmnet(&["report", "--out-dir", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(dir.path().join("fit_sigma.svg")).unwrap();
    for svg in ["fit_sigma.svg", "fit_eps.svg"] {
        let text = fs::read_to_string(dir.path().join(svg)).unwrap();
        assert_eq!(text.matches("<circle").count(), 30, "{svg}");
    }
    assert_eq!(
        fs::read_to_string(dir.path().join("fit_points.csv"))
            .unwrap()
            .lines()
            .count(),
        31
    );

    let o = lmnet(&["report", "--out-dir", out]);
    assert!(o.status.success());
    assert_eq!(fs::read(dir.path().join("fit_sigma.svg")).unwrap(), first);
}

#[test]
fn recall_single_training_input() {
    let dir = tempfile::tempdir().unwrap();
    train_into(dir.path());
    let one = dir.path().join("one.csv");
    fs::write(&one, "layout,angle_deg\n1,0\n").unwrap();
    let o = lmnet(&[
        "recall",
        "--recall-csv",
        one.to_str().unwrap(),
        "--train-csv",
        &fx("table1_reconstructed.csv"),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recall = fs::read_to_string(dir.path().join("recall_report.csv")).unwrap();
    assert_eq!(recall.lines().count(), 2);
    assert!(recall.lines().nth(1).unwrap().ends_with(",G2"));
}

#[test]
fn report_without_rows_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("validation_report.csv"),
        "no,layers,layout,angle_deg,sigma_mpa,eps_pct,sigma_sim,eps_sim,d_sigma,d_eps,d_sigma_rel,d_eps_rel\n",
    )
    .unwrap();
    let o = lmnet(&["report", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn snapshot_version_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    train_into(dir.path());
    let snap = dir.path().join("model.snapshot");
    let text = fs::read_to_string(&snap)
        .unwrap()
        .replacen("lmnet-snapshot v1", "lmnet-snapshot v9", 1);
    fs::write(&snap, text).unwrap();
    let o = lmnet(&[
        "validate",
        "--validation-csv",
        &fx("table2_validation.csv"),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn config_file_supplies_paths() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        format!(
            "# quick run\nvalidation_csv = {}\nsimulated-csv = {}\nout-dir = out\n",
            fx("table2_validation.csv"),
            fx("table2_reference_simulated.csv")
        ),
    )
    .unwrap();
    let o = lmnet(&["validate", "--config", conf.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("out/validation_report.csv").exists());
}
