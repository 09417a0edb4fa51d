use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dqc_core::central_spin::{validate_effective, ModelConfig};
use dqc_core::exec::Parallelism;
use dqc_core::experiments::{evaluate, train_valid_split, Evaluation, LabeledSample};
use dqc_core::qcore::DensityMatrix;
use dqc_core::training::{self, TrainRecord};

use crate::artifact::{ModelArtifact, TrainingSummary};
use crate::config::{RunConfig, Task};
use crate::error::{CliError, Result};
use crate::{svg, tables};

pub struct Context {
    pub cfg: RunConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub parallelism: Parallelism,
    pub svg: bool,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_svg(&self, name: &str, body: String) -> Result<()> {
        if self.svg {
            let p = self.path(name);
            std::fs::write(&p, body).map_err(|e| CliError::io(p, e))?;
        }
        Ok(())
    }

    fn generated_split(&self) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
        let t = &self.cfg.task;
        Ok(train_valid_split(&self.cfg.boundary()?, t.n_train, t.n_valid, self.seed)?)
    }

    fn validation_set(&self) -> Result<Vec<LabeledSample>> {
        match &self.cfg.task.valid_data {
            Some(p) => tables::read_dataset(p),
            None => Ok(self.generated_split()?.1),
        }
    }
}

fn summary(task: &str, record: &TrainRecord) -> TrainingSummary {
    TrainingSummary {
        task: task.into(),
        epochs: record.epochs.len(),
        final_loss: record.final_loss,
        first_loss: record.epochs.first().map_or(record.final_loss, |e| e.loss),
    }
}

fn dataset_svg(title: &str, data: &[LabeledSample], classes: impl Iterator<Item = u8>) -> String {
    let pts: Vec<(f64, f64, u8)> = data.iter().zip(classes).map(|(s, c)| (s.theta1, s.theta2, c)).collect();
    svg::scatter_plot(title, &pts, (0.0, PI), (0.0, PI))
}

pub fn datagen(ctx: &Context) -> Result<()> {
    let (train, valid) = ctx.generated_split()?;
    tables::write_dataset(&ctx.path("train.csv"), &train)?;
    tables::write_dataset(&ctx.path("valid.csv"), &valid)?;
    ctx.write_svg("train.svg", dataset_svg("training set", &train, train.iter().map(|s| s.label)))?;
    let ones = train.iter().filter(|s| s.label == 1).count();
    println!(
        "boundary {}: {} training rows ({} class 1), {} validation rows -> {}",
        ctx.cfg.boundary()?,
        train.len(),
        ones,
        valid.len(),
        ctx.out.display()
    );
    Ok(())
}

pub fn prepare(ctx: &Context) -> Result<()> {
    let m = &ctx.cfg.model;
    let target_bloch = ctx.cfg.task.target.bloch()?;
    let target = DensityMatrix::from_bloch(target_bloch)?;
    let init = training::initial_state_prep_config(m.n_aux, m.mu, m.gamma, ctx.seed)?;
    let opts = ctx.cfg.train_options(Task::Prepare, ctx.parallelism);
    let record = training::train_state_prep(&target, &init, &opts)?;

    let rows = tables::loss_rows(&record, &opts.schedule);
    tables::write_loss_curve(&ctx.path("loss.csv"), &rows)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0 as f64, r.1)).collect();
    ctx.write_svg("loss.svg", svg::line_plot("state preparation", "epoch", "loss (log10)", &pts, true))?;
    ModelArtifact::from_config(&record.config, m.k, ctx.seed, Some(summary("prepare", &record)))
        .save(&ctx.path("model.json"))?;

    let threshold = ctx.cfg.training.threshold;
    let first = record.first_below(threshold);
    println!(
        "target {:?}: loss {:.6} -> {:.6e} after {} epochs; first below {threshold:e} at {}",
        target_bloch,
        rows[0].1,
        record.final_loss,
        record.epochs.len(),
        first.map_or("never".to_string(), |e| format!("epoch {e}"))
    );
    if record.final_loss < threshold {
        Ok(())
    } else {
        Err(CliError::NotMet(format!("final loss {:e} is not below {threshold:e}", record.final_loss)))
    }
}

fn write_evaluation(ctx: &Context, ev: &Evaluation, data: &[LabeledSample], model: &Path) -> Result<()> {
    tables::write_metrics(&ctx.path("metrics.json"), ev.accuracy, ev.roc.auc, data.len(), model)?;
    tables::write_roc(&ctx.path("roc.csv"), &ev.roc)?;
    tables::write_predictions(&ctx.path("predictions.csv"), data, &ev.probabilities, &ev.predictions)?;
    ctx.write_svg("roc.svg", svg::roc_plot(&format!("ROC (AUC {:.4})", ev.roc.auc), &ev.roc.points))?;
    ctx.write_svg(
        "predictions.svg",
        dataset_svg("predicted classes", data, ev.predictions.iter().copied()),
    )?;
    println!("accuracy {:.6}, auc {:.6} on {} samples", ev.accuracy, ev.roc.auc, data.len());
    Ok(())
}

fn two_qubit_check(cfg: &RunConfig) -> Result<()> {
    if cfg.model.n_aux != 2 {
        return Err(CliError::Config(format!(
            "classification uses two auxiliary qubits, config has n_aux = {}",
            cfg.model.n_aux
        )));
    }
    Ok(())
}

pub fn train(ctx: &Context) -> Result<()> {
    two_qubit_check(&ctx.cfg)?;
    let m = &ctx.cfg.model;
    let (train, valid) = match (&ctx.cfg.task.train_data, &ctx.cfg.task.valid_data) {
        (Some(t), _) => (tables::read_dataset(t)?, ctx.validation_set()?),
        (None, Some(v)) => (ctx.generated_split()?.0, tables::read_dataset(v)?),
        (None, None) => ctx.generated_split()?,
    };
    let init = training::initial_classifier_config(m.mu, m.gamma, ctx.seed)?;
    let opts = ctx.cfg.train_options(Task::Train, ctx.parallelism);
    let record = training::train_classifier(&train, &init, &opts, m.k)?;

    let rows = tables::loss_rows(&record, &opts.schedule);
    tables::write_loss_curve(&ctx.path("cost.csv"), &rows)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0 as f64, r.1)).collect();
    ctx.write_svg("cost.svg", svg::line_plot("training cost", "epoch", "cross-entropy", &pts, false))?;
    let model_path = ctx.path("model.json");
    ModelArtifact::from_config(&record.config, m.k, ctx.seed, Some(summary("train", &record))).save(&model_path)?;
    println!(
        "cost {:.6} -> {:.6} over {} epochs ({:.1}s)",
        rows[0].1,
        record.final_loss,
        record.epochs.len(),
        record.wall_clock.as_secs_f64()
    );
    let ev = evaluate(&record.config, &valid, m.k, ctx.parallelism)?;
    write_evaluation(ctx, &ev, &valid, &model_path)
}

pub fn eval(ctx: &Context) -> Result<()> {
    let model_path = ctx
        .cfg
        .task
        .model
        .clone()
        .ok_or_else(|| CliError::Config("eval needs task.model".into()))?;
    let art = ModelArtifact::load(&model_path)?;
    let cfg: ModelConfig = art.to_config()?;
    if cfg.n_aux() != 2 {
        return Err(CliError::Config(format!("model has {} auxiliary qubits, expected 2", cfg.n_aux())));
    }
    let valid = ctx.validation_set()?;
    let ev = evaluate(&cfg, &valid, art.k, ctx.parallelism)?;
    write_evaluation(ctx, &ev, &valid, &model_path)
}

pub fn validate(ctx: &Context) -> Result<()> {
    let m = &ctx.cfg.model;
    let cfg = ModelConfig::seeded(m.n_aux, m.gamma, ctx.seed)?;
    let rows = validate_effective(&cfg, &ctx.cfg.task.gammas)?;
    tables::write_validation(&ctx.path("validation.csv"), &rows)?;
    let mut violations = Vec::new();
    for r in &rows {
        let bound = 5.0 / r.gamma;
        let ok = r.trace_distance <= bound;
        println!(
            "gamma {:>8}: trace distance {:.3e} (bound {:.3e}) {}",
            r.gamma,
            r.trace_distance,
            bound,
            if ok { "ok" } else { "VIOLATED" }
        );
        if !ok {
            violations.push(r.gamma.to_string());
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotMet(format!("trace distance exceeds 5/gamma at gamma = {}", violations.join(", "))))
    }
}
