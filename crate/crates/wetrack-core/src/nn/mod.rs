//! Minimal real-valued neural network engine: LSTM cell, dense layer,
//! analytic gradients, optimizers, and a finite-difference gradient checker.
//!
//! Everything is f64 and single-threaded-deterministic; gradients are plain
//! parameter containers ("shape mirrors params"), produced by hand-derived
//! backward passes and validated against central differences.

mod dense;
mod gradcheck;
mod lstm;
mod optim;

pub use dense::{dense_backward, dense_forward, DenseCache, DenseParams};
pub use gradcheck::grad_check;
pub use lstm::{
    lstm_cell_backward, lstm_cell_forward, LstmCache, LstmCellParams, LstmCellState, GATE_CAND,
    GATE_FORGET, GATE_INPUT, GATE_OUTPUT,
};
pub use optim::{adam_step, sgd_step, AdamState, ParamFlat};

/// Dense-layer activation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// φ'(z) expressed through the activation output o = φ(z); every
    /// activation here admits that form (for relu, o > 0 ⟺ z > 0).
    pub fn derivative_from_output(self, o: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - o * o,
            Activation::Relu => {
                if o > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Sigmoid => o * (1.0 - o),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            "sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

/// LSTM gate activation. tanh-valued gates are unconventional but available
/// (and the tracker's default); sigmoid is the classic choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateActivation {
    Sigmoid,
    Tanh,
}

impl GateActivation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            GateActivation::Sigmoid => sigmoid(x),
            GateActivation::Tanh => x.tanh(),
        }
    }

    pub fn derivative_from_output(self, o: f64) -> f64 {
        match self {
            GateActivation::Sigmoid => o * (1.0 - o),
            GateActivation::Tanh => 1.0 - o * o,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateActivation::Sigmoid => "sigmoid",
            GateActivation::Tanh => "tanh",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "sigmoid" => Some(GateActivation::Sigmoid),
            "tanh" => Some(GateActivation::Tanh),
            _ => None,
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
