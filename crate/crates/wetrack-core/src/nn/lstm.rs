//! A single LSTM cell with explicit forward cache and hand-derived backward.
//!
//! Gates g_j = σ(W_j·i + U_j·c(n−1) + b_j) for j ∈ {forget, input, output},
//! candidate a = tanh(W·i + U·c(n−1) + b), internal state
//! s(n) = g_f ⊙ s(n−1) + g_i ⊙ a, output c(n) = g_o ⊙ tanh(s(n)).
//! σ is configurable (sigmoid or tanh).

use crate::error::{Error, Result};
use crate::numerics::{Mat, Rng};

use super::GateActivation;

pub const GATE_FORGET: usize = 0;
pub const GATE_INPUT: usize = 1;
pub const GATE_OUTPUT: usize = 2;
pub const GATE_CAND: usize = 3;

/// Parameters of one cell: per gate (forget, input, output, candidate) an
/// input weight W (q×d), a recurrent weight U (q×q), and a bias b (q).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    d: usize,
    q: usize,
    pub w: [Mat; 4],
    pub u: [Mat; 4],
    pub b: [Vec<f64>; 4],
}

impl LstmCellParams {
    pub fn zeros(d: usize, q: usize) -> Self {
        LstmCellParams {
            d,
            q,
            w: std::array::from_fn(|_| Mat::zeros(q, d)),
            u: std::array::from_fn(|_| Mat::zeros(q, q)),
            b: std::array::from_fn(|_| vec![0.0; q]),
        }
    }

    /// Seeded initialization: weights uniform in ±1/√fan_in; gate biases 1
    /// (keeps tanh-valued gates open at the start), candidate bias 0.
    pub fn init(d: usize, q: usize, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(d, q);
        let w_bound = 1.0 / (d as f64).sqrt();
        let u_bound = 1.0 / (q as f64).sqrt();
        for j in 0..4 {
            for v in p.w[j].data_mut() {
                *v = rng.uniform_in(-w_bound, w_bound);
            }
            for v in p.u[j].data_mut() {
                *v = rng.uniform_in(-u_bound, u_bound);
            }
            if j != GATE_CAND {
                p.b[j].iter_mut().for_each(|v| *v = 1.0);
            }
        }
        p
    }

    pub fn input_size(&self) -> usize {
        self.d
    }

    pub fn hidden_size(&self) -> usize {
        self.q
    }
}

/// (output c, internal state s) of a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellState {
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl LstmCellState {
    pub fn zeros(q: usize) -> Self {
        LstmCellState {
            c: vec![0.0; q],
            s: vec![0.0; q],
        }
    }
}

/// Forward record retained for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    input: Vec<f64>,
    c_prev: Vec<f64>,
    s_prev: Vec<f64>,
    gates: [Vec<f64>; 3], // post-activation forget/input/output
    cand: Vec<f64>,       // tanh candidate
    tanh_s: Vec<f64>,
    gate_act: GateActivation,
}

pub fn lstm_cell_forward(
    p: &LstmCellParams,
    gate_act: GateActivation,
    input: &[f64],
    prev: &LstmCellState,
) -> Result<(LstmCellState, LstmCache)> {
    if input.len() != p.d {
        return Err(Error::dims(format!(
            "cell input size {} expected {}",
            input.len(),
            p.d
        )));
    }
    if prev.c.len() != p.q || prev.s.len() != p.q {
        return Err(Error::dims(format!(
            "cell state size {}/{} expected {}",
            prev.c.len(),
            prev.s.len(),
            p.q
        )));
    }

    let preact = |j: usize| -> Vec<f64> {
        let mut z = p.b[j].clone();
        p.w[j].matvec_add(input, &mut z);
        p.u[j].matvec_add(&prev.c, &mut z);
        z
    };

    let mut gates: [Vec<f64>; 3] = std::array::from_fn(|j| preact(j));
    for g in gates.iter_mut() {
        for v in g.iter_mut() {
            *v = gate_act.apply(*v);
        }
    }
    let mut cand = preact(GATE_CAND);
    for v in cand.iter_mut() {
        *v = v.tanh();
    }

    let mut s_new = vec![0.0; p.q];
    let mut tanh_s = vec![0.0; p.q];
    let mut c_new = vec![0.0; p.q];
    for k in 0..p.q {
        s_new[k] = gates[GATE_FORGET][k] * prev.s[k] + gates[GATE_INPUT][k] * cand[k];
        tanh_s[k] = s_new[k].tanh();
        c_new[k] = gates[GATE_OUTPUT][k] * tanh_s[k];
    }

    let next = LstmCellState { c: c_new, s: s_new };
    let cache = LstmCache {
        input: input.to_vec(),
        c_prev: prev.c.clone(),
        s_prev: prev.s.clone(),
        gates,
        cand,
        tanh_s,
        gate_act,
    };
    Ok((next, cache))
}

/// Backward pass. `d_c` / `d_s` are the loss gradients w.r.t. the cell's
/// output and internal state. Returns (parameter gradients, gradient w.r.t.
/// the input, gradient w.r.t. the previous state).
pub fn lstm_cell_backward(
    p: &LstmCellParams,
    cache: &LstmCache,
    d_c: &[f64],
    d_s: &[f64],
) -> Result<(LstmCellParams, Vec<f64>, LstmCellState)> {
    let q = p.q;
    if cache.input.len() != p.d || cache.c_prev.len() != q {
        return Err(Error::dims("cache does not match parameter shapes"));
    }
    if d_c.len() != q || d_s.len() != q {
        return Err(Error::dims(format!(
            "upstream gradient size {}/{} expected {q}",
            d_c.len(),
            d_s.len()
        )));
    }

    let g_f = &cache.gates[GATE_FORGET];
    let g_i = &cache.gates[GATE_INPUT];
    let g_o = &cache.gates[GATE_OUTPUT];

    // Elementwise chain back to the four pre-activations.
    let mut dz = [
        vec![0.0; q], // forget
        vec![0.0; q], // input
        vec![0.0; q], // output
        vec![0.0; q], // candidate
    ];
    let mut d_s_prev = vec![0.0; q];
    for k in 0..q {
        let d_tanh_s = d_c[k] * g_o[k];
        let d_s_total = d_s[k] + d_tanh_s * (1.0 - cache.tanh_s[k] * cache.tanh_s[k]);

        let dg_o = d_c[k] * cache.tanh_s[k];
        let dg_f = d_s_total * cache.s_prev[k];
        let dg_i = d_s_total * cache.cand[k];
        let d_cand = d_s_total * g_i[k];

        dz[GATE_FORGET][k] = dg_f * cache.gate_act.derivative_from_output(g_f[k]);
        dz[GATE_INPUT][k] = dg_i * cache.gate_act.derivative_from_output(g_i[k]);
        dz[GATE_OUTPUT][k] = dg_o * cache.gate_act.derivative_from_output(g_o[k]);
        dz[GATE_CAND][k] = d_cand * (1.0 - cache.cand[k] * cache.cand[k]);

        d_s_prev[k] = d_s_total * g_f[k];
    }

    let mut grads = LstmCellParams::zeros(p.d, q);
    let mut d_input = vec![0.0; p.d];
    let mut d_c_prev = vec![0.0; q];
    for j in 0..4 {
        grads.w[j].outer_add(&dz[j], &cache.input);
        grads.u[j].outer_add(&dz[j], &cache.c_prev);
        for (b, d) in grads.b[j].iter_mut().zip(&dz[j]) {
            *b += d;
        }
        p.w[j].matvec_t_add(&dz[j], &mut d_input);
        p.u[j].matvec_t_add(&dz[j], &mut d_c_prev);
    }

    Ok((
        grads,
        d_input,
        LstmCellState {
            c: d_c_prev,
            s: d_s_prev,
        },
    ))
}
