//! Offline training: teacher-forced window regression and closed-loop
//! fine-tuning, both minimizing the mean squared channel-estimation error
//! with minibatch gradient descent (SGD or Adam).
//!
//! Training never consumes live feedback: all channels, probes, and noises
//! are generated here from the seeded simulator.

use crate::channel::{generate_sequence, ChannelDynamics, ChannelSequence};
use crate::error::{Error, Result};
use crate::nn::{adam_step, sgd_step, AdamState};
use crate::numerics::{CVec, Rng};

use super::{LstmFnnTracker, TrackerParams};

/// Seed-derived stream tags used by [`train`].
const STREAM_DATA: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;
const STREAM_TEACHER_NOISE: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "sgd" => Some(OptimizerKind::Sgd),
            "adam" => Some(OptimizerKind::Adam),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Window inputs are true past channels plus a small Gaussian
    /// perturbation; each training sample is one (window, target) pair.
    TeacherForced,
    /// The tracker runs sequentially over each sequence feeding back its own
    /// estimates; gradients stop at the window boundary (truncated BPTT).
    ClosedLoop,
}

impl TrainMode {
    pub fn name(self) -> &'static str {
        match self {
            TrainMode::TeacherForced => "teacher_forced",
            TrainMode::ClosedLoop => "closed_loop",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// N: number of training samples (windows).
    pub n_samples: usize,
    pub minibatch: usize,
    pub epochs: usize,
    /// Learning rate; 0 disables parameter updates (loss is still measured).
    pub alpha: f64,
    pub optimizer: OptimizerKind,
    pub mode: TrainMode,
    pub train_snr_db: f64,
    pub seed: u64,
    /// Variance per real dimension of the teacher-forcing perturbation.
    pub teacher_noise_var: f64,
    /// Length of each generated training sequence.
    pub seq_len: usize,
}

impl TrainConfig {
    pub fn standard(train_snr_db: f64, seed: u64) -> Self {
        TrainConfig {
            n_samples: 10_000,
            minibatch: 1_000,
            epochs: 100,
            alpha: 1e-3,
            optimizer: OptimizerKind::Adam,
            mode: TrainMode::TeacherForced,
            train_snr_db,
            seed,
            teacher_noise_var: 1e-4,
            seq_len: 1_000,
        }
    }

    pub fn validate(&self, t_window: usize) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be >= 1"));
        }
        if self.minibatch == 0 || self.minibatch > self.n_samples {
            return Err(Error::invalid(format!(
                "minibatch must be in [1, n_samples], got {}",
                self.minibatch
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.teacher_noise_var < 0.0 {
            return Err(Error::invalid("teacher_noise_var must be >= 0"));
        }
        if self.seq_len <= t_window {
            return Err(Error::invalid(format!(
                "seq_len must exceed the window length {t_window}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub mode: TrainMode,
    /// Mean window loss per epoch (running training loss).
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
}

struct Window {
    est_slots: Vec<Vec<f64>>,
    fb_slots: Vec<f64>,
    target: Vec<f64>,
}

struct Updater {
    kind: OptimizerKind,
    alpha: f64,
    adam: AdamState,
}

impl Updater {
    fn new(kind: OptimizerKind, alpha: f64, params: &TrackerParams) -> Self {
        Updater {
            kind,
            alpha,
            adam: AdamState::for_params(params),
        }
    }

    fn apply(&mut self, params: &mut TrackerParams, grads: &TrackerParams) -> Result<()> {
        if self.alpha == 0.0 {
            return Ok(());
        }
        match self.kind {
            OptimizerKind::Sgd => sgd_step(params, grads, self.alpha),
            OptimizerKind::Adam => adam_step(
                params,
                grads,
                &mut self.adam,
                self.alpha,
                0.9,
                0.999,
                1e-8,
            ),
        }
    }
}

/// Train the tracker in place, generating its own data at the configured
/// SNR. Returns the per-epoch loss history.
pub fn train(
    tracker: &mut LstmFnnTracker,
    cfg: &TrainConfig,
    dynamics: &ChannelDynamics,
    zeta: f64,
) -> Result<TrainReport> {
    let t = tracker.arch().t_window;
    cfg.validate(t)?;
    let sequences = generate_training_sequences(tracker, cfg, dynamics, zeta)?;
    match cfg.mode {
        TrainMode::TeacherForced => train_teacher_forced(tracker, cfg, &sequences),
        TrainMode::ClosedLoop => train_closed_loop(tracker, cfg, &sequences),
    }
}

fn generate_training_sequences(
    tracker: &LstmFnnTracker,
    cfg: &TrainConfig,
    dynamics: &ChannelDynamics,
    zeta: f64,
) -> Result<Vec<ChannelSequence>> {
    let t = tracker.arch().t_window;
    let m = tracker.arch().m;
    let windows_per_seq = cfg.seq_len - t;
    let n_seq = cfg.n_samples.div_ceil(windows_per_seq);
    let mut data_rng = Rng::with_stream(cfg.seed, STREAM_DATA);
    (0..n_seq)
        .map(|_| generate_sequence(cfg.seq_len, m, dynamics, zeta, cfg.train_snr_db, &mut data_rng))
        .collect()
}

fn build_teacher_windows(
    cfg: &TrainConfig,
    t: usize,
    sequences: &[ChannelSequence],
) -> Vec<Window> {
    let mut noise_rng = Rng::with_stream(cfg.seed, STREAM_TEACHER_NOISE);
    let sigma = cfg.teacher_noise_var.sqrt();
    let mut windows = Vec::with_capacity(cfg.n_samples);
    'outer: for seq in sequences {
        for n in t..seq.len() {
            let est_slots: Vec<Vec<f64>> = (0..t)
                .map(|tau| {
                    let mut reals = seq.channels[n - t + tau].to_reals();
                    for v in &mut reals {
                        *v += sigma * noise_rng.normal();
                    }
                    reals
                })
                .collect();
            let fb_slots: Vec<f64> =
                (0..t).map(|tau| seq.feedbacks[n - t + 1 + tau]).collect();
            windows.push(Window {
                est_slots,
                fb_slots,
                target: seq.channels[n].to_reals(),
            });
            if windows.len() == cfg.n_samples {
                break 'outer;
            }
        }
    }
    windows
}

fn train_teacher_forced(
    tracker: &mut LstmFnnTracker,
    cfg: &TrainConfig,
    sequences: &[ChannelSequence],
) -> Result<TrainReport> {
    let t = tracker.arch().t_window;
    let windows = build_teacher_windows(cfg, t, sequences);
    if windows.len() < cfg.n_samples {
        return Err(Error::invalid(format!(
            "generated only {} of {} requested windows",
            windows.len(),
            cfg.n_samples
        )));
    }

    let mut shuffle_rng = Rng::with_stream(cfg.seed, STREAM_SHUFFLE);
    let mut updater = Updater::new(cfg.optimizer, cfg.alpha, &tracker.params);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.minibatch) {
            let mut grads = tracker.params.zeros_like();
            let mut batch_loss = 0.0;
            for &idx in batch {
                let w = &windows[idx];
                let (loss, g) = window_loss_and_grads(tracker, w)?;
                batch_loss += loss;
                grads.accumulate(&g);
            }
            grads.scale(1.0 / batch.len() as f64);
            epoch_loss += batch_loss;
            updater.apply(&mut tracker.params, &grads)?;
        }
        let mean_loss = epoch_loss / windows.len() as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!("training loss {mean_loss}"),
            });
        }
        epoch_losses.push(mean_loss);
    }

    Ok(TrainReport {
        mode: TrainMode::TeacherForced,
        final_loss: *epoch_losses.last().expect("epochs >= 1"),
        epoch_losses,
    })
}

fn window_loss_and_grads(
    tracker: &LstmFnnTracker,
    w: &Window,
) -> Result<(f64, TrackerParams)> {
    let (h_hat, cache) = tracker.forward_window(&w.est_slots, &w.fb_slots)?;
    let out = h_hat.to_reals();
    let mut loss = 0.0;
    let mut d_out = vec![0.0; out.len()];
    for k in 0..out.len() {
        let diff = out[k] - w.target[k];
        loss += diff * diff;
        d_out[k] = 2.0 * diff;
    }
    let grads = tracker.backward_window(&cache, &d_out)?;
    Ok((loss, grads))
}

fn train_closed_loop(
    tracker: &mut LstmFnnTracker,
    cfg: &TrainConfig,
    sequences: &[ChannelSequence],
) -> Result<TrainReport> {
    let t = tracker.arch().t_window;
    let mut shuffle_rng = Rng::with_stream(cfg.seed, STREAM_SHUFFLE);
    let mut updater = Updater::new(cfg.optimizer, cfg.alpha, &tracker.params);
    let mut seq_order: Vec<usize> = (0..sequences.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut seq_order);
        let mut epoch_loss = 0.0;
        let mut step_count = 0usize;
        let mut grads = tracker.params.zeros_like();
        let mut batch_count = 0usize;
        for &si in &seq_order {
            let seq = &sequences[si];
            // Warm start from true history, matching the evaluation
            // protocol; gradients never cross the window boundary.
            let history: Vec<CVec> = seq.channels[..t].to_vec();
            tracker.seed_window(&history, &seq.feedbacks[..t])?;
            for n in t..seq.len() {
                if step_count == cfg.n_samples {
                    break;
                }
                let (h_hat, cache) = tracker.track_step_traced(seq.feedbacks[n])?;
                let out = h_hat.to_reals();
                let target = seq.channels[n].to_reals();
                let mut loss = 0.0;
                let mut d_out = vec![0.0; out.len()];
                for k in 0..out.len() {
                    let diff = out[k] - target[k];
                    loss += diff * diff;
                    d_out[k] = 2.0 * diff;
                }
                epoch_loss += loss;
                step_count += 1;
                grads.accumulate(&tracker.backward_window(&cache, &d_out)?);
                batch_count += 1;
                if batch_count == cfg.minibatch {
                    grads.scale(1.0 / batch_count as f64);
                    updater.apply(&mut tracker.params, &grads)?;
                    grads = tracker.params.zeros_like();
                    batch_count = 0;
                }
            }
        }
        if batch_count > 0 {
            grads.scale(1.0 / batch_count as f64);
            updater.apply(&mut tracker.params, &grads)?;
        }
        let mean_loss = epoch_loss / step_count.max(1) as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                detail: format!("training loss {mean_loss}"),
            });
        }
        epoch_losses.push(mean_loss);
    }
    tracker.reset_window();

    Ok(TrainReport {
        mode: TrainMode::ClosedLoop,
        final_loss: *epoch_losses.last().expect("epochs >= 1"),
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, GateActivation, ParamFlat};
    use crate::tracker::{build_tracker, TrackerArch};

    fn tiny_arch() -> TrackerArch {
        TrackerArch {
            m: 2,
            t_window: 2,
            k_depth: 2,
            l_hidden: 1,
            q_hidden: 8,
            gate_activation: GateActivation::Tanh,
            fnn_hidden_activation: Activation::Relu,
            fnn_output_activation: Activation::Identity,
            untied: false,
            fb_scale: 2.0,
        }
    }

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            n_samples: 200,
            minibatch: 50,
            epochs: 3,
            alpha: 1e-3,
            optimizer: OptimizerKind::Adam,
            mode: TrainMode::TeacherForced,
            train_snr_db: 30.0,
            seed: 99,
            teacher_noise_var: 1e-4,
            seq_len: 60,
        }
    }

    #[test]
    fn zero_alpha_leaves_parameters_unchanged() {
        let arch = tiny_arch();
        let mut tracker = build_tracker(&arch, &mut Rng::seeded(1)).unwrap();
        let before = tracker.params().to_flat();
        let mut cfg = tiny_cfg();
        cfg.alpha = 0.0;
        cfg.epochs = 1;
        cfg.minibatch = cfg.n_samples;
        let dynamics = ChannelDynamics::linear(0.998).unwrap();
        let report = train(&mut tracker, &cfg, &dynamics, 1.0).unwrap();
        assert_eq!(report.epoch_losses.len(), 1);
        assert_eq!(tracker.params().to_flat(), before);
    }

    #[test]
    fn training_reduces_loss_on_small_problem() {
        let arch = tiny_arch();
        let mut tracker = build_tracker(&arch, &mut Rng::seeded(2)).unwrap();
        let mut cfg = tiny_cfg();
        cfg.epochs = 40;
        let dynamics = ChannelDynamics::linear(0.998).unwrap();
        let report = train(&mut tracker, &cfg, &dynamics, 1.0).unwrap();
        let first = report.epoch_losses[0];
        let last = report.final_loss;
        assert!(
            last < 0.5 * first,
            "loss did not drop: first {first}, last {last}"
        );
    }

    #[test]
    fn training_is_deterministic() {
        let arch = tiny_arch();
        let dynamics = ChannelDynamics::linear(0.998).unwrap();
        let run = || {
            let mut tracker = build_tracker(&arch, &mut Rng::seeded(5)).unwrap();
            let report = train(&mut tracker, &tiny_cfg(), &dynamics, 1.0).unwrap();
            (tracker.params().to_flat(), report.epoch_losses)
        };
        let (pa, la) = run();
        let (pb, lb) = run();
        assert_eq!(pa, pb);
        assert_eq!(la, lb);
    }

    #[test]
    fn closed_loop_mode_runs_and_reports() {
        let arch = tiny_arch();
        let mut tracker = build_tracker(&arch, &mut Rng::seeded(7)).unwrap();
        let dynamics = ChannelDynamics::linear(0.998).unwrap();
        let mut cfg = tiny_cfg();
        train(&mut tracker, &cfg, &dynamics, 1.0).unwrap();
        cfg.mode = TrainMode::ClosedLoop;
        cfg.epochs = 2;
        let report = train(&mut tracker, &cfg, &dynamics, 1.0).unwrap();
        assert_eq!(report.epoch_losses.len(), 2);
        assert!(report.final_loss.is_finite());
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_cfg();
        cfg.minibatch = cfg.n_samples + 1;
        assert!(cfg.validate(2).is_err());
        let mut cfg = tiny_cfg();
        cfg.epochs = 0;
        assert!(cfg.validate(2).is_err());
        let mut cfg = tiny_cfg();
        cfg.seq_len = 2;
        assert!(cfg.validate(2).is_err());
    }
}
