//! CSV and JSON outputs. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use dqc_core::central_spin::ValidationRow;
use dqc_core::experiments::{LabeledSample, RocCurve};
use dqc_core::training::{Schedule, TrainRecord};

use crate::error::{CliError, Result};

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_dataset(path: &Path, data: &[LabeledSample]) -> Result<()> {
    let mut out = String::from("theta1,theta2,label\n");
    for s in data {
        writeln!(out, "{},{},{}", s.theta1, s.theta2, s.label).unwrap();
    }
    write_file(path, &out)
}

#[derive(Deserialize)]
struct Row {
    theta1: f64,
    theta2: f64,
    label: u8,
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledSample>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Row { path: path.into(), line: 1, msg: format!("{other:?}") },
    })?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Row { path: path.into(), line: 1, msg: e.to_string() })?;
    if header != vec!["theta1", "theta2", "label"] {
        return Err(CliError::Row {
            path: path.into(),
            line: 1,
            msg: "expected header theta1,theta2,label".into(),
        });
    }
    let mut data = Vec::new();
    for (i, rec) in reader.deserialize::<Row>().enumerate() {
        // header is line 1
        let line = i as u64 + 2;
        let row = rec.map_err(|e| CliError::Row {
            path: path.into(),
            line: e.position().map_or(line, |p| p.line()),
            msg: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        })?;
        if !(row.theta1.is_finite() && row.theta2.is_finite()) {
            return Err(CliError::Row { path: path.into(), line, msg: "non-finite angle".into() });
        }
        if row.label > 1 {
            return Err(CliError::Row { path: path.into(), line, msg: format!("label {} is not 0 or 1", row.label) });
        }
        data.push(LabeledSample { theta1: row.theta1, theta2: row.theta2, label: row.label });
    }
    if data.is_empty() {
        return Err(CliError::Row { path: path.into(), line: 2, msg: "no data rows".into() });
    }
    Ok(data)
}

/// One row per epoch plus a closing row for the state after the last update.
pub fn loss_rows(record: &TrainRecord, schedule: &Schedule) -> Vec<(usize, f64, f64)> {
    let n = record.epochs.len();
    record
        .epochs
        .iter()
        .map(|e| (e.epoch, e.loss, e.eta))
        .chain(std::iter::once((n, record.final_loss, schedule.rate(n))))
        .collect()
}

pub fn write_loss_curve(path: &Path, rows: &[(usize, f64, f64)]) -> Result<()> {
    let mut out = String::from("epoch,loss,eta\n");
    for (epoch, loss, eta) in rows {
        writeln!(out, "{epoch},{loss},{eta}").unwrap();
    }
    write_file(path, &out)
}

pub fn write_roc(path: &Path, roc: &RocCurve) -> Result<()> {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in &roc.points {
        writeln!(out, "{fpr},{tpr}").unwrap();
    }
    write_file(path, &out)
}

pub fn write_predictions(path: &Path, data: &[LabeledSample], probs: &[f64], preds: &[u8]) -> Result<()> {
    let mut out = String::from("theta1,theta2,label,prob,predicted\n");
    for ((s, p), c) in data.iter().zip(probs).zip(preds) {
        writeln!(out, "{},{},{},{p},{c}", s.theta1, s.theta2, s.label).unwrap();
    }
    write_file(path, &out)
}

/// Fixed key order and six decimals for the scores.
pub fn metrics_json(accuracy: f64, auc: f64, n_samples: usize, model: &Path) -> String {
    let model = serde_json::to_string(&model.display().to_string()).expect("string serializes");
    format!(
        "{{\n  \"accuracy\": {accuracy:.6},\n  \"auc\": {auc:.6},\n  \"n_samples\": {n_samples},\n  \"model\": {model}\n}}\n"
    )
}

pub fn write_metrics(path: &Path, accuracy: f64, auc: f64, n_samples: usize, model: &Path) -> Result<()> {
    write_file(path, &metrics_json(accuracy, auc, n_samples, model))
}

pub fn write_validation(path: &Path, rows: &[ValidationRow]) -> Result<()> {
    let n_aux = rows.first().map_or(0, |r| r.aux_distances.len());
    let mut out = String::from("gamma,trace_distance,bound");
    for k in 1..=n_aux {
        write!(out, ",aux{k}_distance").unwrap();
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{},{}", r.gamma, r.trace_distance, 5.0 / r.gamma).unwrap();
        for d in &r.aux_distances {
            write!(out, ",{d}").unwrap();
        }
        out.push('\n');
    }
    write_file(path, &out)
}
