//! Experiment configuration: a flat key-value (TOML) file covering the
//! simulation, architecture, training, and evaluation parameters, plus the
//! master seed every random stream derives from.

use std::path::Path;

use serde::Deserialize;

use crate::channel::{ChannelDynamics, DynamicsKind};
use crate::error::{Error, Result};
use crate::nn::{Activation, GateActivation};
use crate::tracker::{OptimizerKind, TrackerArch, TrainConfig, TrainMode};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    // Simulation
    pub m: usize,
    pub gamma: f64,
    pub zeta: f64,
    /// "linear" or "nonlinear" (tanh drift).
    pub dynamics: String,
    pub nonlinear_strength: f64,
    pub real_channel: bool,

    // SNR points
    pub snr_grid_db: Vec<f64>,
    pub train_snr_db: f64,

    // Architecture
    pub t_window: usize,
    pub k_depth: usize,
    pub l_hidden: usize,
    pub q_hidden: usize,
    /// "tanh" or "sigmoid".
    pub gate_activation: String,
    pub untied: bool,

    // Training
    pub n_train_samples: usize,
    pub minibatch: usize,
    pub epochs: usize,
    pub alpha: f64,
    /// "adam" or "sgd".
    pub optimizer: String,
    pub teacher_noise_var: f64,
    /// Closed-loop fine-tuning epochs after teacher-forced training
    /// (0 disables the phase).
    pub finetune_epochs: usize,
    pub train_seq_len: usize,
    /// Sequence length for the fine-tuning phase. Short sequences keep the
    /// window distribution anchored to the seeded history, so the gradient
    /// teaches drift correction instead of collapsing to the zero estimate.
    pub finetune_seq_len: usize,

    // Evaluation
    pub n_test_samples: usize,
    pub test_seq_len: usize,
    pub n_trajectory_steps: usize,
    pub process_noise_mc_samples: usize,
    pub literal_beamformer: bool,

    pub seed: u64,
    pub output_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 2,
            gamma: 0.998,
            zeta: 1.0,
            dynamics: "linear".into(),
            nonlinear_strength: 0.0,
            real_channel: false,
            snr_grid_db: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            train_snr_db: 30.0,
            t_window: 2,
            k_depth: 3,
            l_hidden: 2,
            q_hidden: 20,
            gate_activation: "tanh".into(),
            untied: false,
            n_train_samples: 10_000,
            minibatch: 1_000,
            epochs: 100,
            alpha: 1e-3,
            optimizer: "adam".into(),
            teacher_noise_var: 1e-4,
            finetune_epochs: 10,
            train_seq_len: 1_000,
            finetune_seq_len: 100,
            n_test_samples: 2_000_000,
            test_seq_len: 1_000,
            n_trajectory_steps: 1_000,
            process_noise_mc_samples: 1_000_000,
            literal_beamformer: false,
            seed: 20240001,
            output_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("m must be >= 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("snr_grid_db must be non-empty".into()));
        }
        if self.n_test_samples == 0 {
            return Err(Error::Config("n_test_samples must be >= 1".into()));
        }
        if !(0.0 < self.zeta && self.zeta <= 1.0) {
            return Err(Error::Config(format!("zeta must be in (0,1], got {}", self.zeta)));
        }
        if self.test_seq_len <= self.t_window {
            return Err(Error::Config("test_seq_len must exceed t_window".into()));
        }
        if self.n_trajectory_steps <= self.t_window {
            return Err(Error::Config("n_trajectory_steps must exceed t_window".into()));
        }
        self.channel_dynamics()?;
        self.tracker_arch()?.validate()?;
        self.train_config(TrainMode::TeacherForced, self.train_snr_db)?
            .validate(self.t_window)?;
        Ok(())
    }

    pub fn channel_dynamics(&self) -> Result<ChannelDynamics> {
        let kind = match self.dynamics.as_str() {
            "linear" => DynamicsKind::Linear,
            "nonlinear" => DynamicsKind::Nonlinear,
            other => {
                return Err(Error::Config(format!(
                    "dynamics must be \"linear\" or \"nonlinear\", got \"{other}\""
                )))
            }
        };
        ChannelDynamics::new(kind, self.gamma, self.nonlinear_strength, self.real_channel)
    }

    pub fn tracker_arch(&self) -> Result<TrackerArch> {
        let gate_activation = GateActivation::parse(&self.gate_activation).ok_or_else(|| {
            Error::Config(format!(
                "gate_activation must be \"tanh\" or \"sigmoid\", got \"{}\"",
                self.gate_activation
            ))
        })?;
        Ok(TrackerArch {
            m: self.m,
            t_window: self.t_window,
            k_depth: self.k_depth,
            l_hidden: self.l_hidden,
            q_hidden: self.q_hidden,
            gate_activation,
            fnn_hidden_activation: Activation::Relu,
            fnn_output_activation: Activation::Identity,
            untied: self.untied,
            fb_scale: self.zeta * self.m as f64,
        })
    }

    pub fn train_config(&self, mode: TrainMode, snr_db: f64) -> Result<TrainConfig> {
        let optimizer = OptimizerKind::parse(&self.optimizer).ok_or_else(|| {
            Error::Config(format!(
                "optimizer must be \"adam\" or \"sgd\", got \"{}\"",
                self.optimizer
            ))
        })?;
        let (epochs, seed, seq_len) = match mode {
            TrainMode::TeacherForced => (self.epochs, self.seed, self.train_seq_len),
            // The fine-tuning phase draws fresh sequences from a derived
            // seed so it does not replay the teacher-phase data.
            TrainMode::ClosedLoop => (
                self.finetune_epochs,
                self.seed ^ 0x9e37_79b9_7f4a_7c15,
                self.finetune_seq_len,
            ),
        };
        Ok(TrainConfig {
            n_samples: self.n_train_samples,
            minibatch: self.minibatch.min(self.n_train_samples),
            epochs: epochs.max(1),
            alpha: self.alpha,
            optimizer,
            mode,
            train_snr_db: snr_db,
            seed,
            teacher_noise_var: self.teacher_noise_var,
            seq_len,
        })
    }

    /// Test corpus shape: as many sequences of `test_seq_len` as needed to
    /// score at least `n_test_samples` steps after the warm-up cut.
    pub fn test_sequence_count(&self) -> usize {
        let scored_per_seq = self.test_seq_len - self.t_window;
        self.n_test_samples.div_ceil(scored_per_seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.tracker_arch().unwrap().input_size(), 5);
    }

    #[test]
    fn toml_round_trip_with_overrides() {
        let text = r#"
m = 2
gamma = 0.9
snr_grid_db = [10.0, 30.0]
epochs = 5
optimizer = "sgd"
"#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.gamma, 0.9);
        assert_eq!(cfg.epochs, 5);
        assert_eq!(cfg.optimizer, "sgd");
        // Untouched fields keep their defaults.
        assert_eq!(cfg.q_hidden, 20);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let res = toml::from_str::<ExperimentConfig>("nonexistent_key = 1");
        assert!(res.is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.snr_grid_db.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.dynamics = "quadratic".into();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.zeta = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn test_corpus_shape() {
        let cfg = ExperimentConfig::default();
        // 2e6 samples at 1000-step sequences with T = 2 warm-up.
        assert_eq!(cfg.test_sequence_count(), 2_000_000_usize.div_ceil(998));
    }
}
