//! Trained-model files. Floats are written in shortest round-trip form, so
//! `load(save(m))` reproduces every value bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use dqc_core::central_spin::{CouplingMatrix, ModelConfig};
use dqc_core::dissipation::DissipativeMode;

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAngles {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSummary {
    /// `prepare` or `train`.
    pub task: String,
    pub epochs: usize,
    pub final_loss: f64,
    pub first_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub version: u32,
    pub gamma: f64,
    pub mu: f64,
    pub k: f64,
    pub couplings: Vec<[f64; 9]>,
    pub modes: Vec<ModeAngles>,
    pub seed: u64,
    pub training: Option<TrainingSummary>,
}

impl ModelArtifact {
    pub fn from_config(cfg: &ModelConfig, k: f64, seed: u64, training: Option<TrainingSummary>) -> Self {
        Self {
            version: FORMAT_VERSION,
            gamma: cfg.gamma(),
            mu: cfg.modes()[0].mu(),
            k,
            couplings: cfg.couplings().iter().map(|j| j.row_major()).collect(),
            modes: cfg.modes().iter().map(|m| ModeAngles { theta: m.theta(), phi: m.phi() }).collect(),
            seed,
            training,
        }
    }

    pub fn to_config(&self) -> dqc_core::Result<ModelConfig> {
        let couplings = self
            .couplings
            .iter()
            .map(|j| CouplingMatrix::from_row_major(j))
            .collect::<dqc_core::Result<Vec<_>>>()?;
        let modes = self
            .modes
            .iter()
            .map(|m| DissipativeMode::new(m.theta, m.phi, self.mu))
            .collect::<dqc_core::Result<Vec<_>>>()?;
        ModelConfig::new(couplings, modes, self.gamma)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("artifact serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let art: ModelArtifact = serde_json::from_str(&text)
            .map_err(|e| CliError::Artifact { path: path.into(), msg: e.to_string() })?;
        if art.version != FORMAT_VERSION {
            return Err(CliError::Artifact {
                path: path.into(),
                msg: format!("unsupported format version {}", art.version),
            });
        }
        art.to_config().map_err(|e| CliError::Artifact { path: path.into(), msg: e.to_string() })?;
        Ok(art)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let cfg = dqc_core::training::initial_state_prep_config(3, 0.3, 100.0, 9).unwrap();
        let cfg = cfg
            .with_modes(vec![
                DissipativeMode::new(0.1 + 1e-17, 1.0 / 3.0, 0.3).unwrap(),
                DissipativeMode::new(2.9, 6.2, 0.3).unwrap(),
                DissipativeMode::new(std::f64::consts::PI, 0.0, 0.3).unwrap(),
            ])
            .unwrap();
        let summary = TrainingSummary {
            task: "prepare".into(),
            epochs: 5,
            final_loss: 0.1 + 0.2,
            first_loss: 1.0,
        };
        let art = ModelArtifact::from_config(&cfg, 10.0, 9, Some(summary));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        art.save(&path).unwrap();
        let back = ModelArtifact::load(&path).unwrap();
        assert_eq!(back, art);
        assert_eq!(back.to_config().unwrap(), cfg);
    }

    #[test]
    fn random_couplings_survive_a_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        for seed in 0..200 {
            let cfg = dqc_core::training::initial_classifier_config(1.0, 100.0, seed).unwrap();
            let art = ModelArtifact::from_config(&cfg, 10.0, seed, None);
            art.save(&path).unwrap();
            assert_eq!(ModelArtifact::load(&path).unwrap(), art, "seed {seed}");
        }
    }

    #[test]
    fn rejects_other_versions_and_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let cfg = dqc_core::training::initial_state_prep_config(1, 1.0, 100.0, 1).unwrap();
        let mut art = ModelArtifact::from_config(&cfg, 10.0, 1, None);
        art.version = 7;
        art.save(&path).unwrap();
        assert!(ModelArtifact::load(&path).is_err());
        std::fs::write(&path, r#"{"version":1,"gamma":1,"mu":1,"k":1,"couplings":[[1,2]],"modes":[],"seed":0,"training":null}"#)
            .unwrap();
        assert!(ModelArtifact::load(&path).is_err());
    }
}
