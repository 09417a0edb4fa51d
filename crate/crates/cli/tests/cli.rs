use std::path::Path;
use std::process::{Command, Output};

fn dqc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqc")).args(args).current_dir(dir).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn datagen_rows_follow_the_boundary_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "run.toml", "[task]\nboundary = \"linear\"\nn_train = 4\nn_valid = 3\n");
    for out in ["a", "b"] {
        let o = dqc(d, &["datagen", "--config", "run.toml", "--seed", "5", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["train.csv", "valid.csv"] {
        assert_eq!(read(d, &format!("a/{f}")), read(d, &format!("b/{f}")));
    }
    let train = read(d, "a/train.csv");
    let mut lines = train.lines();
    assert_eq!(lines.next(), Some("theta1,theta2,label"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        // linear boundary: class 1 on or above theta2 = 1.5π − 2·theta1
        let g = 1.5 * std::f64::consts::PI - 2.0 * r[0];
        assert_eq!(r[2], if r[1] >= g { 1.0 } else { 0.0 }, "{r:?}");
        assert!((0.0..=std::f64::consts::PI).contains(&r[0]));
    }
    assert_eq!(read(d, "a/valid.csv").lines().count(), 4);
}

#[test]
fn zero_epochs_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[training]\nepochs = 0\n");
    let o = dqc(dir.path(), &["prepare", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epochs must be ≥ 1"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[model]\ngama = 10.0\n");
    let o = dqc(dir.path(), &["datagen", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gama"), "{}", stderr(&o));
}

#[test]
fn five_auxiliary_qubits_are_refused_by_the_full_solver() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[model]\nn_aux = 5\n");
    let o = dqc(dir.path(), &["validate", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("N=4"), "{}", stderr(&o));
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "valid.csv", "theta1,theta2,label\n0.1,0.2,1\n0.3,oops,0\n");
    write(d, "bad_label.csv", "theta1,theta2,label\n0.1,0.2,1\n0.3,0.4,0\n0.5,0.6,2\n");
    write(d, "run.toml", "[task]\nvalid_data = \"valid.csv\"\n[training]\nepochs = 1\n");
    let o = dqc(d, &["train", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("valid.csv:3:"), "{}", stderr(&o));

    write(d, "run.toml", "[task]\nvalid_data = \"bad_label.csv\"\n[training]\nepochs = 1\n");
    let o = dqc(d, &["train", "--config", "run.toml"]);
    assert!(stderr(&o).contains("bad_label.csv:4: label 2"), "{}", stderr(&o));
}

#[test]
fn missing_data_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[task]\ntrain_data = \"nowhere.csv\"\n");
    let o = dqc(dir.path(), &["train", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere.csv"));
}

#[test]
fn saved_model_scores_identically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "train.toml", "[task]\nn_train = 40\nn_valid = 60\n[training]\nepochs = 15\n");
    let o = dqc(d, &["train", "--config", "train.toml", "--out", "t", "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    write(d, "eval.toml", "[task]\nn_train = 40\nn_valid = 60\nmodel = \"t/model.json\"\n");
    let o = dqc(d, &["eval", "--config", "eval.toml", "--out", "e"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let strip = |s: String| s.lines().filter(|l| !l.contains("\"model\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(read(d, "t/metrics.json")), strip(read(d, "e/metrics.json")));
    assert_eq!(read(d, "t/predictions.csv"), read(d, "e/predictions.csv"));
    assert_eq!(read(d, "t/roc.csv"), read(d, "e/roc.csv"));
    assert_eq!(read(d, "t/cost.csv").lines().count(), 1 + 15 + 1);
}

#[test]
fn prepare_writes_a_decreasing_finite_curve() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "run.toml", "[model]\nn_aux = 1\n[training]\nepochs = 60\n[task]\ntarget = [0.0, 0.0, -1.0]\n");
    let o = dqc(d, &["prepare", "--config", "run.toml", "--svg"]);
    // exit 0 or 3 depending on whether the threshold was reached; never an error
    assert!(matches!(o.status.code(), Some(0 | 3)), "{}", stderr(&o));
    let curve = read(d, "out/loss.csv");
    let loss: Vec<f64> = curve.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(loss.len(), 61);
    assert!(loss.iter().all(|x| x.is_finite() && *x >= 0.0));
    assert!(loss.last().unwrap() <= &loss[0]);
    assert!(read(d, "out/loss.svg").starts_with("<svg"));
    assert!(read(d, "out/model.json").contains("\"version\": 1"));
}

#[test]
fn custom_coefficients_parse() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[task]\nboundary = \"1,-2,1,-0.5\"\nn_train = 10\nn_valid = 10\n");
    let o = dqc(dir.path(), &["datagen", "--config", "run.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));

    write(dir.path(), "run.toml", "[task]\nboundary = \"1,,2\"\n");
    let o = dqc(dir.path(), &["datagen", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validation_distance_shrinks_with_the_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = dqc(dir.path(), &["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = read(dir.path(), "out/validation.csv");
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("gamma,trace_distance,bound,aux1_distance,aux2_distance"));
    let dist: Vec<(f64, f64)> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    assert_eq!(dist.iter().map(|r| r.0).collect::<Vec<_>>(), vec![50.0, 100.0, 1000.0]);
    assert!(dist[2].1 < dist[1].1 && dist[1].1 < dist[0].1);
}

#[test]
fn threshold_miss_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", "[training]\nepochs = 1\nthreshold = 1e-9\n");
    let o = dqc(dir.path(), &["prepare", "--config", "run.toml"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("not below"));
}
