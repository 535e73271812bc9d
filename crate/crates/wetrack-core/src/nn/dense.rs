//! Fully connected layer: o = φ(V·ι + β).

use crate::error::{Error, Result};
use crate::numerics::{Mat, Rng};

use super::Activation;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub v: Mat,
    pub beta: Vec<f64>,
    pub activation: Activation,
}

impl DenseParams {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        DenseParams {
            v: Mat::zeros(output, input),
            beta: vec![0.0; output],
            activation,
        }
    }

    /// Weights uniform in ±1/√fan_in, biases zero.
    pub fn init(input: usize, output: usize, activation: Activation, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(input, output, activation);
        let bound = 1.0 / (input as f64).sqrt();
        for v in p.v.data_mut() {
            *v = rng.uniform_in(-bound, bound);
        }
        p
    }

    pub fn input_size(&self) -> usize {
        self.v.cols()
    }

    pub fn output_size(&self) -> usize {
        self.v.rows()
    }
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Vec<f64>,
    output: Vec<f64>,
}

pub fn dense_forward(p: &DenseParams, input: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
    if input.len() != p.input_size() {
        return Err(Error::dims(format!(
            "dense input size {} expected {}",
            input.len(),
            p.input_size()
        )));
    }
    let mut out = p.beta.clone();
    p.v.matvec_add(input, &mut out);
    for v in out.iter_mut() {
        *v = p.activation.apply(*v);
    }
    let cache = DenseCache {
        input: input.to_vec(),
        output: out.clone(),
    };
    Ok((out, cache))
}

pub fn dense_backward(
    p: &DenseParams,
    cache: &DenseCache,
    d_out: &[f64],
) -> Result<(DenseParams, Vec<f64>)> {
    if cache.input.len() != p.input_size() || cache.output.len() != p.output_size() {
        return Err(Error::dims("cache does not match parameter shapes"));
    }
    if d_out.len() != p.output_size() {
        return Err(Error::dims(format!(
            "upstream gradient size {} expected {}",
            d_out.len(),
            p.output_size()
        )));
    }
    let dz: Vec<f64> = d_out
        .iter()
        .zip(&cache.output)
        .map(|(d, o)| d * p.activation.derivative_from_output(*o))
        .collect();
    let mut grads = DenseParams::zeros(p.input_size(), p.output_size(), p.activation);
    grads.v.outer_add(&dz, &cache.input);
    grads.beta.copy_from_slice(&dz);
    let d_input = p.v.matvec_t(&dz);
    Ok((grads, d_input))
}
