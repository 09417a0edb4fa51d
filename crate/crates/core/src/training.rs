//! Losses, finite-difference gradients and the two gradient-descent loops.
//!
//! Both trainers are full-batch: one epoch is one update of every trainable
//! parameter. Gradient coordinates are probed independently, so the probes
//! of an epoch fan out through [`crate::exec`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use crate::central_spin::{bloch_generator_from, central_bloch, CouplingMatrix, ModelConfig};
use crate::dissipation::DissipativeMode;
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::experiments::LabeledSample;
use crate::qcore::DensityMatrix;

/// Default central-difference step for couplings and angles.
pub const FD_STEP: f64 = 1e-4;
/// Default sigmoid steepness.
pub const SIGMOID_K: f64 = 10.0;
/// Probability clamp applied before taking logarithms.
pub const PROB_EPS: f64 = 1e-12;
/// Below this the state-preparation loss is treated as converged and its
/// (non-smooth) gradient as zero.
pub const LOSS_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant { eta: f64 },
    /// `η_min + ½(η_max − η_min)(1 + cos(π t / T))`.
    Cosine { eta_max: f64, eta_min: f64, total_epochs: usize },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Schedule::Constant { eta } => eta > 0.0 && eta.is_finite(),
            Schedule::Cosine { eta_max, eta_min, total_epochs } => {
                eta_min > 0.0 && eta_max >= eta_min && eta_max.is_finite() && total_epochs > 0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid learning-rate schedule {self:?}")))
        }
    }

    pub fn rate(&self, t: usize) -> f64 {
        match *self {
            Schedule::Constant { eta } => eta,
            Schedule::Cosine { eta_max, eta_min, total_epochs } => {
                let frac = (t.min(total_epochs)) as f64 / total_epochs as f64;
                eta_min + 0.5 * (eta_max - eta_min) * (1.0 + (PI * frac).cos())
            }
        }
    }
}

/// Flattened trainable parameters: the nine row-major entries of each
/// `J_n`, then `(θ_n, φ_n)` pairs when the modes are trainable.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub n_aux: usize,
    pub train_modes: bool,
}

impl ParamVector {
    pub fn from_config(cfg: &ModelConfig, train_modes: bool) -> Self {
        let mut values: Vec<f64> = cfg.couplings().iter().flat_map(|j| j.row_major()).collect();
        if train_modes {
            values.extend(cfg.modes().iter().flat_map(|m| [m.theta(), m.phi()]));
        }
        Self { values, n_aux: cfg.n_aux(), train_modes }
    }

    pub fn expected_len(n_aux: usize, train_modes: bool) -> usize {
        9 * n_aux + if train_modes { 2 * n_aux } else { 0 }
    }

    /// Rebuild a config, taking `Γ`, `μ` and (if frozen) the angles from `template`.
    pub fn to_config(&self, template: &ModelConfig) -> Result<ModelConfig> {
        apply_params(&self.values, self.train_modes, template)
    }
}

fn apply_params(values: &[f64], train_modes: bool, template: &ModelConfig) -> Result<ModelConfig> {
    let n = template.n_aux();
    if values.len() != ParamVector::expected_len(n, train_modes) {
        return Err(Error::LengthMismatch(values.len(), ParamVector::expected_len(n, train_modes)));
    }
    let couplings = values[..9 * n]
        .chunks(9)
        .map(CouplingMatrix::from_row_major)
        .collect::<Result<Vec<_>>>()?;
    let modes = if train_modes {
        template
            .modes()
            .iter()
            .zip(values[9 * n..].chunks(2))
            .map(|(m, a)| m.with_angles(a[0], a[1]))
            .collect::<Result<Vec<_>>>()?
    } else {
        template.modes().to_vec()
    };
    ModelConfig::new(couplings, modes, template.gamma())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Objective before this epoch's update.
    pub loss: f64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct TrainRecord {
    pub epochs: Vec<EpochRecord>,
    /// Objective after the last update.
    pub final_loss: f64,
    pub params: ParamVector,
    pub config: ModelConfig,
    pub wall_clock: Duration,
}

impl TrainRecord {
    /// First epoch whose recorded loss is below `threshold`; the state after
    /// the last update counts as epoch `epochs.len()`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.epochs
            .iter()
            .position(|e| e.loss < threshold)
            .or_else(|| (self.final_loss < threshold).then_some(self.epochs.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub schedule: Schedule,
    pub fd_step: f64,
    pub parallelism: Parallelism,
}

impl TrainOptions {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be ≥ 1".into()));
        }
        if !(self.fd_step > 0.0) || !self.fd_step.is_finite() {
            return Err(Error::InvalidParameter(format!("fd step must be > 0, got {}", self.fd_step)));
        }
        self.schedule.validate()
    }
}

/// Euclidean distance between Bloch vectors.
pub fn bloch_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `√(Σ_a Tr(σ_a(ρ_S − ρ_target))²)` for the effective steady state `ρ_S`.
pub fn state_prep_loss(cfg: &ModelConfig, target: &DensityMatrix) -> Result<f64> {
    if target.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("target must be a qubit state, got dim {}", target.dim())));
    }
    let (r, _) = central_bloch(cfg)?;
    Ok(bloch_distance(r, target.bloch()))
}

/// Central-difference gradient `(f(p + h e_i) − f(p − h e_i)) / 2h`.
pub fn grad_fd<F>(objective: F, p: &[f64], h: f64, parallelism: Parallelism) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("fd step must be > 0, got {h}")));
    }
    let probes = exec::try_map_indexed(parallelism, 2 * p.len(), |probe| {
        let (i, sign) = (probe / 2, if probe % 2 == 0 { 1.0 } else { -1.0 });
        let mut q = p.to_vec();
        q[i] += sign * h;
        let v = objective(&q)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective(Some(i)))
        }
    })?;
    Ok(probes.chunks(2).map(|pm| (pm[0] - pm[1]) / (2.0 * h)).collect())
}

// Generator streams, so one run seed can drive data, couplings and targets
// without the draws overlapping. Datasets use the default stream 0.
const COUPLING_STREAM: u64 = 1;
const TARGET_STREAM: u64 = 2;

/// Couplings with i.i.d. `N(0, 0.5²)` entries from a seeded generator.
pub fn random_couplings(n_aux: usize, seed: u64) -> Vec<CouplingMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(COUPLING_STREAM);
    let normal = Normal::new(0.0, 0.5).expect("valid normal");
    (0..n_aux)
        .map(|_| CouplingMatrix([[0u8; 3]; 3].map(|row| row.map(|_| normal.sample(&mut rng)))))
        .collect()
}

/// Bloch vector of a pure state drawn uniformly from the sphere.
pub fn random_pure_bloch(seed: u64) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TARGET_STREAM);
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
    [sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta]
}

/// Seeded couplings with every mode at `θ = π/2, φ = 0`.
pub fn initial_state_prep_config(n_aux: usize, mu: f64, gamma: f64, seed: u64) -> Result<ModelConfig> {
    let modes = vec![DissipativeMode::new(PI / 2.0, 0.0, mu)?; n_aux];
    ModelConfig::new(random_couplings(n_aux, seed), modes, gamma)
}

/// Seeded couplings for the two-feature classifier; the angles are placeholders
/// that each sample overwrites.
pub fn initial_classifier_config(mu: f64, gamma: f64, seed: u64) -> Result<ModelConfig> {
    initial_state_prep_config(2, mu, gamma, seed)
}

fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("non-finite {what}")))
    }
}

fn descend<F>(objective: F, init: Vec<f64>, opts: &TrainOptions, zero_below: Option<f64>) -> Result<(Vec<EpochRecord>, Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let mut p = init;
    let mut history = Vec::with_capacity(opts.epochs);
    for epoch in 0..opts.epochs {
        let at_epoch = |e: Error| Error::Training { epoch, source: Box::new(e) };
        let loss = objective(&p).and_then(|v| check_finite(v, "loss")).map_err(at_epoch)?;
        let eta = opts.schedule.rate(epoch);
        history.push(EpochRecord { epoch, loss, eta });
        if zero_below.is_some_and(|floor| loss < floor) {
            continue;
        }
        let grad = grad_fd(&objective, &p, opts.fd_step, opts.parallelism).map_err(at_epoch)?;
        for (x, g) in p.iter_mut().zip(grad) {
            *x -= eta * g;
        }
    }
    let final_loss = objective(&p)
        .and_then(|v| check_finite(v, "loss"))
        .map_err(|e| Error::Training { epoch: opts.epochs, source: Box::new(e) })?;
    Ok((history, p, final_loss))
}

/// Gradient descent on couplings and mode angles towards `target`.
pub fn train_state_prep(target: &DensityMatrix, init: &ModelConfig, opts: &TrainOptions) -> Result<TrainRecord> {
    opts.validate()?;
    if target.dim() != 2 {
        return Err(Error::DimensionMismatch("target must be a qubit state".into()));
    }
    let start = Instant::now();
    let goal = target.bloch();
    let n = init.n_aux();
    let gamma = init.gamma();
    let mus: Vec<f64> = init.modes().iter().map(|m| m.mu()).collect();
    let objective = |p: &[f64]| -> Result<f64> {
        let couplings: Vec<CouplingMatrix> =
            p[..9 * n].chunks(9).map(CouplingMatrix::from_row_major).collect::<Result<_>>()?;
        let modes: Vec<DissipativeMode> = p[9 * n..]
            .chunks(2)
            .zip(&mus)
            .map(|(a, &mu)| DissipativeMode::new(a[0], a[1], mu))
            .collect::<Result<_>>()?;
        let (r, _) = bloch_generator_from(&couplings, &modes, gamma).steady_bloch()?;
        Ok(bloch_distance(r, goal))
    };
    let p0 = ParamVector::from_config(init, true);
    let (epochs, values, final_loss) = descend(objective, p0.values, opts, Some(LOSS_FLOOR))?;
    let params = ParamVector { values, ..p0 };
    let config = params.to_config(init)?;
    Ok(TrainRecord { epochs, final_loss, params, config, wall_clock: start.elapsed() })
}

pub fn sigmoid(z: f64, k: f64) -> f64 {
    1.0 / (1.0 + (-k * z).exp())
}

fn encode_modes(template: &[DissipativeMode], sample: &LabeledSample) -> Result<[DissipativeMode; 2]> {
    if template.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "2-D samples need exactly two auxiliary qubits, model has {}",
            template.len()
        )));
    }
    Ok([
        DissipativeMode::new(sample.theta1, 0.0, template[0].mu())?,
        DissipativeMode::new(sample.theta2, 0.0, template[1].mu())?,
    ])
}

/// `⟨σ_z⟩` of the central steady state with the sample written into the modes.
fn sigma_z(couplings: &[CouplingMatrix], template: &[DissipativeMode], gamma: f64, sample: &LabeledSample) -> Result<f64> {
    let modes = encode_modes(template, sample)?;
    let (r, _) = bloch_generator_from(couplings, &modes, gamma).steady_bloch()?;
    Ok(r[2])
}

/// Model config with the sample encoded as `θ₁, θ₂` (and `φ₁ = φ₂ = 0`).
pub fn encode(cfg: &ModelConfig, sample: &LabeledSample) -> Result<ModelConfig> {
    cfg.with_modes(encode_modes(cfg.modes(), sample)?.to_vec())
}

/// `(f(⟨σ_z⟩), class)` with class 1 iff `⟨σ_z⟩ ≥ 0`.
pub fn predict(cfg: &ModelConfig, sample: &LabeledSample, k: f64) -> Result<(f64, u8)> {
    let z = sigma_z(cfg.couplings(), cfg.modes(), cfg.gamma(), sample)?;
    Ok((sigmoid(z, k), u8::from(z >= 0.0)))
}

pub fn predict_all(cfg: &ModelConfig, data: &[LabeledSample], k: f64, parallelism: Parallelism) -> Result<Vec<(f64, u8)>> {
    exec::try_map_indexed(parallelism, data.len(), |i| predict(cfg, &data[i], k))
}

fn sample_cost(prob: f64, label: u8) -> f64 {
    let f = prob.clamp(PROB_EPS, 1.0 - PROB_EPS);
    if label == 1 {
        -f.ln()
    } else {
        -(1.0 - f).ln()
    }
}

fn check_labels(data: &[LabeledSample]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(s) = data.iter().find(|s| s.label > 1) {
        return Err(Error::InvalidParameter(format!("label {} is not binary", s.label)));
    }
    Ok(())
}

fn cost_of(couplings: &[CouplingMatrix], template: &[DissipativeMode], gamma: f64, data: &[LabeledSample], k: f64) -> Result<f64> {
    let mut total = 0.0;
    for s in data {
        total += sample_cost(sigmoid(sigma_z(couplings, template, gamma, s)?, k), s.label);
    }
    Ok(total / data.len() as f64)
}

/// Mean binary cross-entropy of the sigmoid outputs against the labels.
pub fn cross_entropy(cfg: &ModelConfig, data: &[LabeledSample], k: f64, parallelism: Parallelism) -> Result<f64> {
    check_labels(data)?;
    let per_sample = exec::try_map_indexed(parallelism, data.len(), |i| {
        let z = sigma_z(cfg.couplings(), cfg.modes(), cfg.gamma(), &data[i])?;
        Ok(sample_cost(sigmoid(z, k), data[i].label))
    })?;
    Ok(per_sample.iter().sum::<f64>() / data.len() as f64)
}

/// Gradient descent on the couplings only; the modes carry the data.
pub fn train_classifier(data: &[LabeledSample], init: &ModelConfig, opts: &TrainOptions, k: f64) -> Result<TrainRecord> {
    opts.validate()?;
    check_labels(data)?;
    encode(init, &data[0])?;
    let start = Instant::now();
    let template = init.modes().to_vec();
    let gamma = init.gamma();
    let objective = |p: &[f64]| -> Result<f64> {
        let couplings: Vec<CouplingMatrix> =
            p.chunks(9).map(CouplingMatrix::from_row_major).collect::<Result<_>>()?;
        cost_of(&couplings, &template, gamma, data, k)
    };
    let p0 = ParamVector::from_config(init, false);
    let (epochs, values, final_loss) = descend(objective, p0.values, opts, None)?;
    let params = ParamVector { values, ..p0 };
    let config = params.to_config(init)?;
    Ok(TrainRecord { epochs, final_loss, params, config, wall_clock: start.elapsed() })
}
