//! Aggregated gradient verification suites: per-layer checks plus 100
//! random small end-to-end trackers, each compared against central finite
//! differences at ε = 1e-6.

use crate::error::Result;
use crate::nn::{
    dense_backward, dense_forward, grad_check, lstm_cell_backward, lstm_cell_forward, Activation,
    DenseParams, GateActivation, LstmCellParams, LstmCellState,
};
use crate::numerics::Rng;
use crate::tracker::{build_tracker, TrackerArch, TrackerParams};

pub const GRADCHECK_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckSummary {
    pub lstm_cell_max: f64,
    pub dense_max: f64,
    pub tracker_max: f64,
}

impl GradCheckSummary {
    pub fn overall_max(&self) -> f64 {
        self.lstm_cell_max.max(self.dense_max).max(self.tracker_max)
    }
}

fn lstm_cell_suite(rng: &mut Rng, trials: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for act in [GateActivation::Sigmoid, GateActivation::Tanh] {
        for _ in 0..trials {
            let p = LstmCellParams::init(3, 4, rng);
            let input: Vec<f64> = (0..3).map(|_| 0.5 * rng.normal()).collect();
            let prev = LstmCellState {
                c: (0..4).map(|_| 0.5 * rng.normal()).collect(),
                s: (0..4).map(|_| 0.5 * rng.normal()).collect(),
            };
            let w_c: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
            let w_s: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
            let loss = |params: &LstmCellParams| {
                let (next, _) = lstm_cell_forward(params, act, &input, &prev)?;
                Ok(next.c.iter().zip(&w_c).map(|(c, w)| c * w).sum::<f64>()
                    + next.s.iter().zip(&w_s).map(|(s, w)| s * w).sum::<f64>())
            };
            let analytic = |params: &LstmCellParams| {
                let (_, cache) = lstm_cell_forward(params, act, &input, &prev)?;
                let (grads, _, _) = lstm_cell_backward(params, &cache, &w_c, &w_s)?;
                Ok(grads)
            };
            worst = worst.max(grad_check(&p, GRADCHECK_EPSILON, loss, analytic)?);
        }
    }
    Ok(worst)
}

fn dense_suite(rng: &mut Rng, trials: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for act in [
        Activation::Tanh,
        Activation::Relu,
        Activation::Identity,
        Activation::Sigmoid,
    ] {
        for _ in 0..trials {
            let p = DenseParams::init(4, 3, act, rng);
            let input: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
            let weights: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            let loss = |params: &DenseParams| {
                let (out, _) = dense_forward(params, &input)?;
                Ok(out.iter().zip(&weights).map(|(o, w)| o * w).sum())
            };
            let analytic = |params: &DenseParams| {
                let (_, cache) = dense_forward(params, &input)?;
                let (grads, _) = dense_backward(params, &cache, &weights)?;
                Ok(grads)
            };
            worst = worst.max(grad_check(&p, GRADCHECK_EPSILON, loss, analytic)?);
        }
    }
    Ok(worst)
}

fn tracker_suite(rng: &mut Rng, trials: usize) -> Result<f64> {
    let arch = TrackerArch {
        m: 2,
        t_window: 2,
        k_depth: 2,
        l_hidden: 2,
        q_hidden: 6,
        gate_activation: GateActivation::Tanh,
        fnn_hidden_activation: Activation::Relu,
        fnn_output_activation: Activation::Identity,
        untied: false,
        fb_scale: 2.0,
    };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let tracker = build_tracker(&arch, rng)?;
        let est: Vec<Vec<f64>> = (0..arch.t_window)
            .map(|_| (0..4).map(|_| 0.7 * rng.normal()).collect())
            .collect();
        let fbs: Vec<f64> = (0..arch.t_window).map(|_| rng.normal() + 2.0).collect();
        let target: Vec<f64> = (0..4).map(|_| rng.normal()).collect();

        let eval = |params: &TrackerParams| -> Result<f64> {
            let mut probe = tracker.clone();
            *probe.params_mut() = params.clone();
            let (h_hat, _) = probe.forward_window(&est, &fbs)?;
            Ok(h_hat
                .to_reals()
                .iter()
                .zip(&target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum())
        };
        let analytic = |params: &TrackerParams| -> Result<TrackerParams> {
            let mut probe = tracker.clone();
            *probe.params_mut() = params.clone();
            let (h_hat, cache) = probe.forward_window(&est, &fbs)?;
            let out = h_hat.to_reals();
            let d_out: Vec<f64> = out.iter().zip(&target).map(|(o, t)| 2.0 * (o - t)).collect();
            probe.backward_window(&cache, &d_out)
        };
        worst = worst.max(grad_check(tracker.params(), GRADCHECK_EPSILON, eval, analytic)?);
    }
    Ok(worst)
}

/// Run all three suites (100 trials each at the standard small sizes).
pub fn gradcheck_suite(seed: u64) -> Result<GradCheckSummary> {
    let mut rng = Rng::seeded(seed);
    Ok(GradCheckSummary {
        lstm_cell_max: lstm_cell_suite(&mut rng, 100)?,
        dense_max: dense_suite(&mut rng, 100)?,
        tracker_max: tracker_suite(&mut rng, 100)?,
    })
}
