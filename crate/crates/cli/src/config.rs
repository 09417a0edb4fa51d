//! TOML run configuration. Every section and key is optional; missing keys
//! take the defaults below and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dqc_core::experiments::Boundary;
use dqc_core::training::{Schedule, TrainOptions, FD_STEP, SIGMOID_K};
use dqc_core::exec::Parallelism;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub training: TrainingSection,
    pub task: TaskSection,
    /// Output directory; `--out` takes precedence.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n_aux: usize,
    pub gamma: f64,
    pub mu: f64,
    pub k: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { n_aux: 2, gamma: 100.0, mu: 1.0, k: SIGMOID_K }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Constant,
    Cosine,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    /// Defaults to 500 for `prepare` and 400 for `train`.
    pub epochs: Option<usize>,
    /// Defaults to constant for `prepare` and cosine for `train`.
    pub schedule: Option<ScheduleKind>,
    /// Constant rate, or the starting rate of the cosine schedule.
    pub eta: f64,
    pub eta_min: f64,
    pub fd_step: f64,
    pub seed: u64,
    /// `prepare` succeeds iff the final loss is below this.
    pub threshold: f64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            epochs: None,
            schedule: None,
            eta: 0.05,
            eta_min: 0.001,
            fd_step: FD_STEP,
            seed: 0,
            threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    /// `plus`, `zero`, `one`, `minus`, `plus_i`, `minus_i`, `random:<seed>`
    /// or a Bloch vector `[x, y, z]`.
    pub target: Target,
    /// `linear`, `quadratic`, `cubic` or comma-separated coefficients.
    pub boundary: String,
    pub n_train: usize,
    pub n_valid: usize,
    pub gammas: Vec<f64>,
    pub train_data: Option<PathBuf>,
    pub valid_data: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            target: Target::Named("plus".into()),
            boundary: "linear".into(),
            n_train: 200,
            n_valid: 1000,
            gammas: vec![50.0, 100.0, 1000.0],
            train_data: None,
            valid_data: None,
            model: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Target {
    Named(String),
    Bloch([f64; 3]),
}

impl Target {
    pub fn bloch(&self) -> Result<[f64; 3]> {
        let r = match self {
            Target::Bloch(r) => *r,
            Target::Named(name) => match name.as_str() {
                "plus" => [1.0, 0.0, 0.0],
                "minus" => [-1.0, 0.0, 0.0],
                "plus_i" => [0.0, 1.0, 0.0],
                "minus_i" => [0.0, -1.0, 0.0],
                "zero" => [0.0, 0.0, 1.0],
                "one" => [0.0, 0.0, -1.0],
                other => match other.strip_prefix("random:") {
                    Some(seed) => dqc_core::training::random_pure_bloch(
                        seed.trim().parse().map_err(|_| CliError::Config(format!("bad target seed {seed:?}")))?,
                    ),
                    None => return Err(CliError::Config(format!("unknown target {other:?}"))),
                },
            },
        };
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !r.iter().all(|x| x.is_finite()) || norm > 1.0 + 1e-12 {
            return Err(CliError::Config(format!("target Bloch vector {r:?} lies outside the unit ball")));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Prepare,
    Train,
}

impl RunConfig {
    /// Parses `path` and resolves relative file references against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.task.train_data, &mut cfg.task.valid_data, &mut cfg.task.model, &mut cfg.output]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let m = &self.model;
        if m.n_aux == 0 {
            return bad("model.n_aux must be ≥ 1".into());
        }
        if !(m.gamma > 0.0 && m.gamma.is_finite()) {
            return bad(format!("model.gamma must be > 0, got {}", m.gamma));
        }
        if !(-1.0..=1.0).contains(&m.mu) {
            return bad(format!("model.mu must lie in [-1, 1], got {}", m.mu));
        }
        if !(m.k > 0.0 && m.k.is_finite()) {
            return bad(format!("model.k must be > 0, got {}", m.k));
        }
        let t = &self.training;
        if t.epochs == Some(0) {
            return bad("epochs must be ≥ 1".into());
        }
        if !(t.eta > 0.0 && t.eta.is_finite()) || !(t.eta_min > 0.0 && t.eta_min.is_finite()) {
            return bad("training rates must be > 0".into());
        }
        if !(t.fd_step > 0.0 && t.fd_step.is_finite()) {
            return bad(format!("training.fd_step must be > 0, got {}", t.fd_step));
        }
        if !(t.threshold > 0.0) {
            return bad(format!("training.threshold must be > 0, got {}", t.threshold));
        }
        let task = &self.task;
        if task.n_train == 0 || task.n_valid == 0 {
            return bad("dataset sizes must be ≥ 1".into());
        }
        if task.gammas.is_empty() || task.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return bad("task.gammas must be a nonempty list of positive rates".into());
        }
        task.target.bloch()?;
        self.boundary()?;
        for p in [&task.train_data, &task.valid_data, &task.model].into_iter().flatten() {
            if !p.exists() {
                return bad(format!("referenced file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn boundary(&self) -> Result<Boundary> {
        self.task.boundary.parse().map_err(|e: dqc_core::Error| CliError::Config(e.to_string()))
    }

    pub fn epochs(&self, task: Task) -> usize {
        self.training.epochs.unwrap_or(match task {
            Task::Prepare => 500,
            Task::Train => 400,
        })
    }

    pub fn schedule(&self, task: Task) -> Schedule {
        let kind = self.training.schedule.unwrap_or(match task {
            Task::Prepare => ScheduleKind::Constant,
            Task::Train => ScheduleKind::Cosine,
        });
        match kind {
            ScheduleKind::Constant => Schedule::Constant { eta: self.training.eta },
            ScheduleKind::Cosine => Schedule::Cosine {
                eta_max: self.training.eta,
                eta_min: self.training.eta_min,
                total_epochs: self.epochs(task),
            },
        }
    }

    pub fn train_options(&self, task: Task, parallelism: Parallelism) -> TrainOptions {
        TrainOptions {
            epochs: self.epochs(task),
            schedule: self.schedule(task),
            fd_step: self.training.fd_step,
            parallelism,
        }
    }
}
