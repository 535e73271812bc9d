//! The proposed tracker: a T×K grid of stacked LSTM cells produces a coarse
//! channel estimate from the last T estimates and feedbacks; a deep FNN
//! fine-tunes it into the final estimate ĥ(n).
//!
//! Grid layout: T cells unrolled in time (oldest window slot first) by K
//! stacked layers. Step τ feeds layer 1 with [ĥ(n−(T−τ+1)) as 2M reals;
//! r(n−(T−τ)) scaled], so the newest step pairs ĥ(n−1) with the current
//! feedback. Layer k > 1 receives layer k−1's output at the same step; all
//! initial cell states are zero; the coarse estimate h̄(n) is the output of
//! the top layer at the final step. Per-layer cell parameters are shared
//! across the T steps unless `untied` is set.

mod checkpoint;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, save_checkpoint_with_meta};
pub use train::{train, OptimizerKind, TrainConfig, TrainMode, TrainReport};

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::nn::{
    dense_backward, dense_forward, lstm_cell_backward, lstm_cell_forward, Activation, DenseCache,
    DenseParams, GateActivation, LstmCache, LstmCellParams, LstmCellState, ParamFlat,
};
use crate::numerics::{CVec, Rng};

/// Architecture of the tracker, including the fixed input preprocessing
/// (feedback scale) so a checkpoint is self-contained.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerArch {
    /// Antenna count M; channels enter and leave networks as 2M reals.
    pub m: usize,
    /// T: unrolled time steps (window length).
    pub t_window: usize,
    /// K: stacked LSTM layers.
    pub k_depth: usize,
    /// L: hidden FNN layers.
    pub l_hidden: usize,
    /// Hidden width for both the LSTM cells and the FNN hidden layers.
    pub q_hidden: usize,
    pub gate_activation: GateActivation,
    pub fnn_hidden_activation: Activation,
    pub fnn_output_activation: Activation,
    /// Use independent cell parameters per time step instead of sharing
    /// each layer's cell across the T steps.
    pub untied: bool,
    /// Feedback values are divided by this (ζ·M brings them to O(1))
    /// identically at train and test time.
    pub fb_scale: f64,
}

impl TrackerArch {
    /// Standard architecture: T=2, K=3, L=2, q=20, tanh gates, relu hidden,
    /// identity output, tied weights, feedback scale M (ζ=1).
    pub fn standard(m: usize) -> Self {
        TrackerArch {
            m,
            t_window: 2,
            k_depth: 3,
            l_hidden: 2,
            q_hidden: 20,
            gate_activation: GateActivation::Tanh,
            fnn_hidden_activation: Activation::Relu,
            fnn_output_activation: Activation::Identity,
            untied: false,
            fb_scale: m as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("t_window", self.t_window),
            ("k_depth", self.k_depth),
            ("l_hidden", self.l_hidden),
            ("q_hidden", self.q_hidden),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be >= 1")));
            }
        }
        if !(self.fb_scale > 0.0) || !self.fb_scale.is_finite() {
            return Err(Error::invalid(format!(
                "fb_scale must be > 0, got {}",
                self.fb_scale
            )));
        }
        Ok(())
    }

    /// Input width of the first LSTM layer: 2M reals plus one feedback.
    pub fn input_size(&self) -> usize {
        2 * self.m + 1
    }

    /// Output width of the FNN: the 2M real/imag split of ĥ(n).
    pub fn output_size(&self) -> usize {
        2 * self.m
    }
}

/// All trainable parameters: the LSTM grid (outer index = layer; inner = one
/// shared cell, or T cells when untied) and the FNN (L hidden + 1 output).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerParams {
    pub grid: Vec<Vec<LstmCellParams>>,
    pub fnn: Vec<DenseParams>,
}

impl ParamFlat for TrackerParams {
    fn flat_len(&self) -> usize {
        self.grid.iter().flatten().map(|c| c.flat_len()).sum::<usize>()
            + self.fnn.iter().map(|l| l.flat_len()).sum::<usize>()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        for layer in &self.grid {
            for cell in layer {
                cell.write_flat(out);
            }
        }
        for layer in &self.fnn {
            layer.write_flat(out);
        }
    }

    fn read_flat(&mut self, src: &mut std::slice::Iter<'_, f64>) -> Result<()> {
        for layer in &mut self.grid {
            for cell in layer {
                cell.read_flat(src)?;
            }
        }
        for layer in &mut self.fnn {
            layer.read_flat(src)?;
        }
        Ok(())
    }
}

impl TrackerParams {
    fn zeros_like(&self) -> TrackerParams {
        let grid = self
            .grid
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|c| LstmCellParams::zeros(c.input_size(), c.hidden_size()))
                    .collect()
            })
            .collect();
        let fnn = self
            .fnn
            .iter()
            .map(|l| DenseParams::zeros(l.input_size(), l.output_size(), l.activation))
            .collect();
        TrackerParams { grid, fnn }
    }

    fn scale(&mut self, factor: f64) {
        let mut flat = self.to_flat();
        for v in &mut flat {
            *v *= factor;
        }
        self.load_flat(&flat).expect("shape unchanged");
    }

    fn accumulate(&mut self, other: &TrackerParams) {
        let mut flat = self.to_flat();
        for (a, b) in flat.iter_mut().zip(other.to_flat()) {
            *a += b;
        }
        self.load_flat(&flat).expect("shape unchanged");
    }
}

/// Forward record for one window evaluation (needed for BPTT).
pub struct ForwardCache {
    grid: Vec<Vec<LstmCache>>, // [tau][k]
    fnn: Vec<DenseCache>,
    /// Multiply-accumulate count of this evaluation.
    pub macs: u64,
}

/// The tracker: parameters plus the sliding window of the last T channel
/// estimates (as 2M reals) and T raw feedback values. Single-owner mutable
/// state; movable between threads, never shared mutably.
#[derive(Debug, Clone)]
pub struct LstmFnnTracker {
    arch: TrackerArch,
    params: TrackerParams,
    window_est: VecDeque<Vec<f64>>,
    window_fb: VecDeque<f64>,
    macs: u64,
}

/// Initialize a tracker with seeded parameters and a cold (all-zero) window.
pub fn build_tracker(arch: &TrackerArch, rng: &mut Rng) -> Result<LstmFnnTracker> {
    arch.validate()?;
    let cells_per_layer = if arch.untied { arch.t_window } else { 1 };
    let grid = (0..arch.k_depth)
        .map(|k| {
            let d = if k == 0 { arch.input_size() } else { arch.q_hidden };
            (0..cells_per_layer)
                .map(|_| LstmCellParams::init(d, arch.q_hidden, rng))
                .collect()
        })
        .collect();
    let mut fnn: Vec<DenseParams> = Vec::with_capacity(arch.l_hidden + 1);
    for _ in 0..arch.l_hidden {
        fnn.push(DenseParams::init(
            arch.q_hidden,
            arch.q_hidden,
            arch.fnn_hidden_activation,
            rng,
        ));
    }
    fnn.push(DenseParams::init(
        arch.q_hidden,
        arch.output_size(),
        arch.fnn_output_activation,
        rng,
    ));
    let mut tracker = LstmFnnTracker {
        arch: arch.clone(),
        params: TrackerParams { grid, fnn },
        window_est: VecDeque::new(),
        window_fb: VecDeque::new(),
        macs: 0,
    };
    tracker.reset_window();
    Ok(tracker)
}

impl LstmFnnTracker {
    pub fn arch(&self) -> &TrackerArch {
        &self.arch
    }

    pub fn params(&self) -> &TrackerParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut TrackerParams {
        &mut self.params
    }

    fn cell(&self, k: usize, tau: usize) -> &LstmCellParams {
        let cells = &self.params.grid[k];
        if cells.len() == 1 {
            &cells[0]
        } else {
            &cells[tau]
        }
    }

    /// Cold start: zero estimates and zero feedbacks.
    pub fn reset_window(&mut self) {
        let t = self.arch.t_window;
        self.window_est = (0..t).map(|_| vec![0.0; self.arch.output_size()]).collect();
        self.window_fb = (0..t).map(|_| 0.0).collect();
    }

    /// Seed the window with known history: `estimates` are ĥ(n−T..n−1)
    /// oldest first, `feedbacks` the matching r values (the next
    /// [`LstmFnnTracker::track_step`] call supplies the current feedback).
    pub fn seed_window(&mut self, estimates: &[CVec], feedbacks: &[f64]) -> Result<()> {
        let t = self.arch.t_window;
        if estimates.len() != t || feedbacks.len() != t {
            return Err(Error::dims(format!(
                "window seed needs {t} estimates and feedbacks, got {} and {}",
                estimates.len(),
                feedbacks.len()
            )));
        }
        for est in estimates {
            if est.len() != self.arch.m {
                return Err(Error::dims(format!(
                    "estimate length {} expected {}",
                    est.len(),
                    self.arch.m
                )));
            }
        }
        self.window_est = estimates.iter().map(|e| e.to_reals()).collect();
        self.window_fb = feedbacks.iter().copied().collect();
        Ok(())
    }

    /// Total multiply-accumulates counted over all inference calls so far.
    pub fn mac_count(&self) -> u64 {
        self.macs
    }

    pub fn reset_mac_count(&mut self) {
        self.macs = 0;
    }

    /// Unroll the K-layer stack over the T window slots; returns the coarse
    /// estimate h̄(n) (top layer's output at the final step) and the caches.
    pub fn coarse_forward(
        &self,
        est_slots: &[Vec<f64>],
        fb_slots: &[f64],
    ) -> Result<(Vec<f64>, Vec<Vec<LstmCache>>, u64)> {
        let arch = &self.arch;
        if est_slots.len() != arch.t_window || fb_slots.len() != arch.t_window {
            return Err(Error::State(format!(
                "window incomplete: {} estimates / {} feedbacks, need {}",
                est_slots.len(),
                fb_slots.len(),
                arch.t_window
            )));
        }
        let q = arch.q_hidden;
        let mut macs = 0u64;
        let mut states: Vec<LstmCellState> =
            (0..arch.k_depth).map(|_| LstmCellState::zeros(q)).collect();
        let mut caches: Vec<Vec<LstmCache>> = Vec::with_capacity(arch.t_window);

        for tau in 0..arch.t_window {
            let mut input: Vec<f64> = Vec::with_capacity(arch.input_size());
            input.extend_from_slice(&est_slots[tau]);
            input.push(fb_slots[tau] / arch.fb_scale);

            let mut step_caches = Vec::with_capacity(arch.k_depth);
            for k in 0..arch.k_depth {
                let cell = self.cell(k, tau);
                let (next, cache) =
                    lstm_cell_forward(cell, arch.gate_activation, &input, &states[k])?;
                macs += 4 * (q as u64) * (cell.input_size() as u64 + q as u64);
                input = next.c.clone();
                states[k] = next;
                step_caches.push(cache);
            }
            caches.push(step_caches);
        }
        Ok((states[arch.k_depth - 1].c.clone(), caches, macs))
    }

    /// Pass h̄(n) through the FNN and reassemble the 2M-real output into the
    /// complex estimate ĥ(n).
    pub fn fine_tune_forward(
        &self,
        h_bar: &[f64],
    ) -> Result<(CVec, Vec<DenseCache>, u64)> {
        if h_bar.len() != self.arch.q_hidden {
            return Err(Error::dims(format!(
                "coarse estimate width {} expected {}",
                h_bar.len(),
                self.arch.q_hidden
            )));
        }
        let mut macs = 0u64;
        let mut value = h_bar.to_vec();
        let mut caches = Vec::with_capacity(self.params.fnn.len());
        for layer in &self.params.fnn {
            let (out, cache) = dense_forward(layer, &value)?;
            macs += (layer.output_size() * layer.input_size()) as u64;
            value = out;
            caches.push(cache);
        }
        Ok((CVec::from_reals(&value)?, caches, macs))
    }

    /// Full forward over an explicit window.
    pub fn forward_window(
        &self,
        est_slots: &[Vec<f64>],
        fb_slots: &[f64],
    ) -> Result<(CVec, ForwardCache)> {
        let (h_bar, grid_caches, grid_macs) = self.coarse_forward(est_slots, fb_slots)?;
        let (h_hat, fnn_caches, fnn_macs) = self.fine_tune_forward(&h_bar)?;
        Ok((
            h_hat,
            ForwardCache {
                grid: grid_caches,
                fnn: fnn_caches,
                macs: grid_macs + fnn_macs,
            },
        ))
    }

    /// One closed-loop step: push the current feedback, estimate ĥ(n), and
    /// feed the estimate back into the window. Parameters are never mutated.
    pub fn track_step(&mut self, r_now: f64) -> Result<CVec> {
        let (h_hat, _) = self.track_step_traced(r_now)?;
        Ok(h_hat)
    }

    /// [`LstmFnnTracker::track_step`] that also returns the forward cache
    /// (for truncated-BPTT training through the current window).
    pub fn track_step_traced(&mut self, r_now: f64) -> Result<(CVec, ForwardCache)> {
        self.window_fb.pop_front();
        self.window_fb.push_back(r_now);
        let est_slots: Vec<Vec<f64>> = self.window_est.iter().cloned().collect();
        let fb_slots: Vec<f64> = self.window_fb.iter().copied().collect();
        let (h_hat, cache) = self.forward_window(&est_slots, &fb_slots)?;
        self.macs += cache.macs;
        self.window_est.pop_front();
        self.window_est.push_back(h_hat.to_reals());
        Ok((h_hat, cache))
    }

    /// Gradients of a scalar loss w.r.t. every parameter, given the loss
    /// gradient w.r.t. the 2M-real output. Window inputs are constants
    /// (truncated BPTT at the window boundary).
    pub fn backward_window(
        &self,
        cache: &ForwardCache,
        d_output: &[f64],
    ) -> Result<TrackerParams> {
        let arch = &self.arch;
        if d_output.len() != arch.output_size() {
            return Err(Error::dims(format!(
                "output gradient width {} expected {}",
                d_output.len(),
                arch.output_size()
            )));
        }
        let mut grads = self.params.zeros_like();

        // FNN, output layer first.
        let mut d = d_output.to_vec();
        for idx in (0..self.params.fnn.len()).rev() {
            let (g, d_input) = dense_backward(&self.params.fnn[idx], &cache.fnn[idx], &d)?;
            grads.fnn[idx].accumulate_from(&g);
            d = d_input;
        }
        let d_h_bar = d;

        // Grid, newest step and top layer first. `rec[k]` carries the
        // gradient w.r.t. layer k's state output at the previous step.
        let q = arch.q_hidden;
        let mut rec: Vec<LstmCellState> =
            (0..arch.k_depth).map(|_| LstmCellState::zeros(q)).collect();
        for tau in (0..arch.t_window).rev() {
            let mut d_down: Vec<f64> = Vec::new();
            for k in (0..arch.k_depth).rev() {
                let mut d_c = std::mem::replace(&mut rec[k].c, Vec::new());
                if k == arch.k_depth - 1 {
                    if tau == arch.t_window - 1 {
                        for (a, b) in d_c.iter_mut().zip(&d_h_bar) {
                            *a += b;
                        }
                    }
                } else {
                    for (a, b) in d_c.iter_mut().zip(&d_down) {
                        *a += b;
                    }
                }
                let d_s = std::mem::take(&mut rec[k].s);
                let cell = self.cell(k, tau);
                let (cell_grads, d_input, d_prev) =
                    lstm_cell_backward(cell, &cache.grid[tau][k], &d_c, &d_s)?;
                let cell_idx = if self.params.grid[k].len() == 1 { 0 } else { tau };
                grads.grid[k][cell_idx].accumulate_from(&cell_grads);
                rec[k] = d_prev;
                d_down = d_input;
            }
            // d_down now holds the window-input gradient for this step;
            // dropped: window entries are constants.
        }
        Ok(grads)
    }
}

trait AccumulateFrom {
    fn accumulate_from(&mut self, other: &Self);
}

impl AccumulateFrom for DenseParams {
    fn accumulate_from(&mut self, other: &Self) {
        let mut flat = self.to_flat();
        for (a, b) in flat.iter_mut().zip(other.to_flat()) {
            *a += b;
        }
        self.load_flat(&flat).expect("same shape");
    }
}

impl AccumulateFrom for LstmCellParams {
    fn accumulate_from(&mut self, other: &Self) {
        let mut flat = self.to_flat();
        for (a, b) in flat.iter_mut().zip(other.to_flat()) {
            *a += b;
        }
        self.load_flat(&flat).expect("same shape");
    }
}

/// Mean squared channel-estimation error: mean over n of ‖h(n) − ĥ(n)‖²
/// (sum of squared real and imaginary errors).
pub fn loss_mse(true_channels: &[CVec], estimates: &[CVec]) -> Result<f64> {
    if true_channels.is_empty() {
        return Err(Error::invalid("loss over zero samples"));
    }
    if true_channels.len() != estimates.len() {
        return Err(Error::dims(format!(
            "{} true channels vs {} estimates",
            true_channels.len(),
            estimates.len()
        )));
    }
    let mut acc = 0.0;
    for (h, h_hat) in true_channels.iter().zip(estimates) {
        acc += h.sub(h_hat)?.norm_sqr();
    }
    Ok(acc / true_channels.len() as f64)
}

/// Closed-form multiply-accumulate count of one inference step for an
/// architecture; the runtime counter must agree with it.
pub fn inference_macs(arch: &TrackerArch) -> u64 {
    let q = arch.q_hidden as u64;
    let t = arch.t_window as u64;
    let k = arch.k_depth as u64;
    let l = arch.l_hidden as u64;
    let d1 = arch.input_size() as u64;
    let out = arch.output_size() as u64;
    t * 4 * q * (d1 + q) + t * (k - 1) * 4 * q * (q + q) + l * q * q + out * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn small_arch() -> TrackerArch {
        TrackerArch {
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
        }
    }

    #[test]
    fn standard_arch_dimensions() {
        let arch = TrackerArch::standard(2);
        assert_eq!(arch.input_size(), 5);
        assert_eq!(arch.output_size(), 4);
        let tracker = build_tracker(&arch, &mut Rng::seeded(1)).unwrap();
        assert_eq!(tracker.params().grid.len(), 3);
        assert_eq!(tracker.params().grid[0][0].input_size(), 5);
        assert_eq!(tracker.params().grid[1][0].input_size(), 20);
        assert_eq!(tracker.params().fnn.len(), 3);
        assert_eq!(tracker.params().fnn[2].output_size(), 4);
    }

    #[test]
    fn zero_q_rejected() {
        let mut arch = TrackerArch::standard(2);
        arch.q_hidden = 0;
        assert!(build_tracker(&arch, &mut Rng::seeded(1)).is_err());
        let mut arch = TrackerArch::standard(2);
        arch.l_hidden = 0;
        assert!(build_tracker(&arch, &mut Rng::seeded(1)).is_err());
    }

    #[test]
    fn same_seed_same_parameters() {
        let arch = small_arch();
        let a = build_tracker(&arch, &mut Rng::seeded(33)).unwrap();
        let b = build_tracker(&arch, &mut Rng::seeded(33)).unwrap();
        assert_eq!(a.params().to_flat(), b.params().to_flat());
    }

    #[test]
    fn zero_parameters_give_zero_outputs() {
        let arch = small_arch();
        let mut tracker = build_tracker(&arch, &mut Rng::seeded(1)).unwrap();
        let zero = tracker.params().zeros_like();
        tracker.params = zero;
        let est = vec![vec![0.5; 4], vec![-0.25; 4]];
        let fbs = vec![1.0, 2.0];
        let (h_bar, _, _) = tracker.coarse_forward(&est, &fbs).unwrap();
        assert!(h_bar.iter().all(|&v| v == 0.0));
        let (h_hat, _, _) = tracker.fine_tune_forward(&h_bar).unwrap();
        assert!(h_hat.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }

    #[test]
    fn degenerate_grid_is_one_cell() {
        // T = 1, K = 1: the coarse pass must equal a single cell evaluation.
        let mut arch = small_arch();
        arch.t_window = 1;
        arch.k_depth = 1;
        let tracker = build_tracker(&arch, &mut Rng::seeded(5)).unwrap();
        let est = vec![vec![0.3, -0.1, 0.7, 0.2]];
        let fbs = vec![1.4];
        let (h_bar, _, _) = tracker.coarse_forward(&est, &fbs).unwrap();

        let mut input = est[0].clone();
        input.push(fbs[0] / arch.fb_scale);
        let (state, _) = lstm_cell_forward(
            &tracker.params().grid[0][0],
            arch.gate_activation,
            &input,
            &LstmCellState::zeros(arch.q_hidden),
        )
        .unwrap();
        assert_eq!(h_bar, state.c);
    }

    #[test]
    fn track_step_shape_and_determinism() {
        let arch = small_arch();
        let mut a = build_tracker(&arch, &mut Rng::seeded(7)).unwrap();
        let mut b = a.clone();
        for step in 0..20 {
            let r = (step as f64 * 0.37).sin() + 1.0;
            let ha = a.track_step(r).unwrap();
            let hb = b.track_step(r).unwrap();
            assert_eq!(ha.len(), arch.m);
            assert!(ha.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            assert_eq!(ha, hb);
        }
    }

    #[test]
    fn incomplete_window_is_a_state_error() {
        let arch = small_arch();
        let tracker = build_tracker(&arch, &mut Rng::seeded(9)).unwrap();
        let result = tracker.coarse_forward(&[vec![0.0; 4]], &[0.0]);
        assert!(matches!(result, Err(Error::State(_))));
    }

    #[test]
    fn seed_window_validates() {
        let arch = small_arch();
        let mut tracker = build_tracker(&arch, &mut Rng::seeded(9)).unwrap();
        let good = vec![CVec::zeros(2), CVec::zeros(2)];
        assert!(tracker.seed_window(&good, &[0.1, 0.2]).is_ok());
        assert!(tracker.seed_window(&good, &[0.1]).is_err());
        let bad = vec![CVec::zeros(3), CVec::zeros(3)];
        assert!(tracker.seed_window(&bad, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn loss_mse_examples() {
        let h = vec![CVec::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap()];
        assert_eq!(loss_mse(&h, &h).unwrap(), 0.0);
        let zero = vec![CVec::zeros(2)];
        assert_eq!(loss_mse(&h, &zero).unwrap(), 1.0);
        assert!(loss_mse(&[], &[]).is_err());
        assert!(loss_mse(&h, &[]).is_err());
    }

    #[test]
    fn mac_counter_matches_closed_form_and_is_affine() {
        for t in [1usize, 2, 4] {
            for m in [2usize, 4, 8] {
                let mut arch = TrackerArch::standard(m);
                arch.t_window = t;
                let mut tracker = build_tracker(&arch, &mut Rng::seeded(3)).unwrap();
                tracker.track_step(0.5).unwrap();
                assert_eq!(tracker.mac_count(), inference_macs(&arch), "t={t} m={m}");
            }
        }
        // Affine in M at fixed T and in T at fixed M. The sample points
        // double, so consecutive increments of an affine function double too.
        let count = |t: usize, m: usize| {
            let mut arch = TrackerArch::standard(m);
            arch.t_window = t;
            inference_macs(&arch) as i64
        };
        for t in [1usize, 2, 4] {
            assert_eq!(
                2 * (count(t, 4) - count(t, 2)),
                count(t, 8) - count(t, 4),
                "nonlinear in M at t={t}"
            );
        }
        for m in [2usize, 4, 8] {
            assert_eq!(
                2 * (count(2, m) - count(1, m)),
                count(4, m) - count(2, m),
                "nonlinear in T at m={m}"
            );
        }
    }

    /// End-to-end gradient of ‖ĥ − target‖² for one window against central
    /// finite differences on the small architecture.
    #[test]
    fn window_gradient_matches_finite_differences() {
        use crate::nn::grad_check;
        let arch = small_arch();
        let mut rng = Rng::seeded(77);
        let tracker = build_tracker(&arch, &mut rng).unwrap();
        let est: Vec<Vec<f64>> = (0..arch.t_window)
            .map(|_| (0..4).map(|_| rng.normal() * 0.7).collect())
            .collect();
        let fbs: Vec<f64> = (0..arch.t_window).map(|_| rng.normal() + 2.0).collect();
        let target: Vec<f64> = (0..4).map(|_| rng.normal()).collect();

        let eval = |params: &TrackerParams| -> Result<f64> {
            let mut probe = tracker.clone();
            probe.params = params.clone();
            let (h_hat, _) = probe.forward_window(&est, &fbs)?;
            let out = h_hat.to_reals();
            Ok(out
                .iter()
                .zip(&target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum())
        };
        let analytic = |params: &TrackerParams| -> Result<TrackerParams> {
            let mut probe = tracker.clone();
            probe.params = params.clone();
            let (h_hat, cache) = probe.forward_window(&est, &fbs)?;
            let out = h_hat.to_reals();
            let d_out: Vec<f64> = out.iter().zip(&target).map(|(o, t)| 2.0 * (o - t)).collect();
            probe.backward_window(&cache, &d_out)
        };
        let err = grad_check(&tracker.params, 1e-6, eval, analytic).unwrap();
        assert!(err <= 1e-4, "rel err {err}");
    }

    #[test]
    fn untied_grid_has_independent_cells() {
        let mut arch = small_arch();
        arch.untied = true;
        let tracker = build_tracker(&arch, &mut Rng::seeded(15)).unwrap();
        assert_eq!(tracker.params().grid[0].len(), arch.t_window);
        // Untied cells are initialized independently.
        assert_ne!(
            tracker.params().grid[0][0].to_flat(),
            tracker.params().grid[0][1].to_flat()
        );
    }
}
