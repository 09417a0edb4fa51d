//! Synthetic 2-D datasets and classifier metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::central_spin::ModelConfig;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::training::{self, Schedule, TrainOptions, TrainRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub theta1: f64,
    pub theta2: f64,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Linear,
    Quadratic,
    Cubic,
    Custom,
}

/// Polynomial decision boundary `g(x)`; a point is class 1 iff `θ₂ ≥ g(θ₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    kind: BoundaryKind,
    /// Highest degree first.
    coeffs: Vec<f64>,
}

impl Boundary {
    /// `g(x) = −2x + 1.5π`
    pub fn linear() -> Self {
        Self { kind: BoundaryKind::Linear, coeffs: vec![-2.0, 1.5 * PI] }
    }

    /// `g(x) = x² − πx + π²/4`
    pub fn quadratic() -> Self {
        Self { kind: BoundaryKind::Quadratic, coeffs: vec![1.0, -PI, PI * PI / 4.0] }
    }

    /// `g(x) = x³ − 2x² + x − 0.5`
    pub fn cubic() -> Self {
        Self { kind: BoundaryKind::Cubic, coeffs: vec![1.0, -2.0, 1.0, -0.5] }
    }

    pub fn custom(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("boundary needs finite coefficients".into()));
        }
        Ok(Self { kind: BoundaryKind::Custom, coeffs })
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn label(&self, theta1: f64, theta2: f64) -> u8 {
        u8::from(theta2 >= self.eval(theta1))
    }
}

impl FromStr for Boundary {
    type Err = Error;

    /// Accepts `linear`, `quadratic`, `cubic`, or a comma-separated
    /// coefficient list (highest degree first) whose entries may carry a
    /// `pi` factor, e.g. `-2,1.5pi` or `1,-pi,0.25pi^2`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => return Ok(Self::linear()),
            "quadratic" => return Ok(Self::quadratic()),
            "cubic" => return Ok(Self::cubic()),
            _ => {}
        }
        let coeffs = s.split(',').map(parse_coefficient).collect::<Result<Vec<_>>>()?;
        Self::custom(coeffs)
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BoundaryKind::Linear => write!(f, "linear"),
            BoundaryKind::Quadratic => write!(f, "quadratic"),
            BoundaryKind::Cubic => write!(f, "cubic"),
            BoundaryKind::Custom => {
                let parts: Vec<String> = self.coeffs.iter().map(|c| format!("{c:?}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

fn parse_coefficient(tok: &str) -> Result<f64> {
    let t = tok.trim().to_ascii_lowercase();
    let bad = || Error::InvalidParameter(format!("bad boundary coefficient {tok:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let (num, power) = match t.find("pi") {
        None => (t.as_str(), 0),
        Some(i) => {
            let rest = t[i + 2..].trim();
            let power = if rest.is_empty() {
                1
            } else {
                rest.strip_prefix('^').and_then(|p| p.parse::<i32>().ok()).ok_or_else(bad)?
            };
            (t[..i].trim_end_matches('*').trim(), power)
        }
    };
    let base = match num {
        "" | "+" => 1.0,
        "-" => -1.0,
        n => n.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(base * PI.powi(power))
}

/// Sampling rectangle for both features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self { lo: 0.0, hi: PI }
    }
}

pub fn generate_dataset(boundary: &Boundary, n: usize, seed: u64) -> Result<Vec<LabeledSample>> {
    generate_dataset_in(boundary, n, seed, Domain::default())
}

/// `n` points drawn i.i.d. uniform on the domain square, labelled by the boundary.
pub fn generate_dataset_in(
    boundary: &Boundary,
    n: usize,
    seed: u64,
    domain: Domain,
) -> Result<Vec<LabeledSample>> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(domain.lo < domain.hi) {
        return Err(Error::InvalidParameter(format!("empty domain [{}, {}]", domain.lo, domain.hi)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let theta1 = rng.random_range(domain.lo..=domain.hi);
            let theta2 = rng.random_range(domain.lo..=domain.hi);
            LabeledSample { theta1, theta2, label: boundary.label(theta1, theta2) }
        })
        .collect())
}

pub fn accuracy(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC over every distinct score threshold; tied scores move together.
pub fn roc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassDataset);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum();
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub probabilities: Vec<f64>,
    pub predictions: Vec<u8>,
    pub accuracy: f64,
    pub roc: RocCurve,
}

/// Score every sample with the trained couplings and summarize.
pub fn evaluate(
    cfg: &ModelConfig,
    data: &[LabeledSample],
    k: f64,
    parallelism: Parallelism,
) -> Result<Evaluation> {
    let scored = training::predict_all(cfg, data, k, parallelism)?;
    let labels: Vec<u8> = data.iter().map(|s| s.label).collect();
    let (probabilities, predictions): (Vec<f64>, Vec<u8>) = scored.into_iter().unzip();
    let accuracy = accuracy(&predictions, &labels)?;
    let roc = roc(&probabilities, &labels)?;
    Ok(Evaluation { probabilities, predictions, accuracy, roc })
}

/// Draws `n_train + n_valid` points from one seeded stream and splits them.
pub fn train_valid_split(
    boundary: &Boundary,
    n_train: usize,
    n_valid: usize,
    seed: u64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if n_train == 0 || n_valid == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut all = generate_dataset(boundary, n_train + n_valid, seed)?;
    let valid = all.split_off(n_train);
    Ok((all, valid))
}

/// Everything that fixes a classifier run except the boundary and the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierProtocol {
    pub n_train: usize,
    pub n_valid: usize,
    pub mu: f64,
    pub gamma: f64,
    pub k: f64,
    pub options: TrainOptions,
}

impl Default for ClassifierProtocol {
    fn default() -> Self {
        Self {
            n_train: 200,
            n_valid: 1000,
            mu: 1.0,
            gamma: 100.0,
            k: training::SIGMOID_K,
            options: TrainOptions {
                epochs: 400,
                schedule: Schedule::Cosine { eta_max: 0.05, eta_min: 0.001, total_epochs: 400 },
                fd_step: training::FD_STEP,
                parallelism: Parallelism::default(),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierRun {
    pub seed: u64,
    pub train: Vec<LabeledSample>,
    pub valid: Vec<LabeledSample>,
    pub record: TrainRecord,
    pub evaluation: Evaluation,
}

/// Data split, coupling initialization and training all derive from `seed`.
pub fn run_classifier(boundary: &Boundary, seed: u64, protocol: &ClassifierProtocol) -> Result<ClassifierRun> {
    let (train, valid) = train_valid_split(boundary, protocol.n_train, protocol.n_valid, seed)?;
    let init = training::initial_classifier_config(protocol.mu, protocol.gamma, seed)?;
    let record = training::train_classifier(&train, &init, &protocol.options, protocol.k)?;
    let evaluation = evaluate(&record.config, &valid, protocol.k, protocol.options.parallelism)?;
    Ok(ClassifierRun { seed, train, valid, record, evaluation })
}

/// Highest validation accuracy, then higher AUC, then earlier run.
pub fn best_run(runs: &[ClassifierRun]) -> Option<&ClassifierRun> {
    runs.iter().reduce(|best, r| {
        let key = |x: &ClassifierRun| (x.evaluation.accuracy, x.evaluation.roc.auc);
        if key(r) > key(best) {
            r
        } else {
            best
        }
    })
}
