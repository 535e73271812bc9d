//! Parameter flattening and the two optimizers.
//!
//! Gradients reuse the parameter container types, so an optimizer only needs
//! a stable flat view of any container. `ParamFlat` provides that view with
//! a documented, fixed element order; optimizer state (Adam moments) and the
//! checkpoint format both rely on it.

use crate::error::{Error, Result};
use crate::numerics::Mat;

use super::{DenseParams, LstmCellParams};

/// Fixed-order flat view of a parameter container.
///
/// Orders: `Mat` is row-major; `LstmCellParams` is W, U, b per gate in
/// forget/input/output/candidate order; `DenseParams` is V then β;
/// `Vec<T>` is element order.
pub trait ParamFlat {
    fn flat_len(&self) -> usize;
    fn write_flat(&self, out: &mut Vec<f64>);
    /// Consume exactly `flat_len()` values; shapes are never changed.
    fn read_flat(&mut self, src: &mut std::slice::Iter<'_, f64>) -> Result<()>;

    fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        self.write_flat(&mut out);
        out
    }

    fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.flat_len() {
            return Err(Error::dims(format!(
                "flat parameter length {} expected {}",
                flat.len(),
                self.flat_len()
            )));
        }
        let mut it = flat.iter();
        self.read_flat(&mut it)
    }
}

fn take<'a>(src: &mut std::slice::Iter<'a, f64>, dst: &mut [f64]) -> Result<()> {
    for v in dst.iter_mut() {
        *v = *src
            .next()
            .ok_or_else(|| Error::dims("flat parameter stream exhausted"))?;
    }
    Ok(())
}

impl ParamFlat for Mat {
    fn flat_len(&self) -> usize {
        self.data().len()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(self.data());
    }

    fn read_flat(&mut self, src: &mut std::slice::Iter<'_, f64>) -> Result<()> {
        take(src, self.data_mut())
    }
}

impl ParamFlat for LstmCellParams {
    fn flat_len(&self) -> usize {
        (0..4)
            .map(|j| self.w[j].flat_len() + self.u[j].flat_len() + self.b[j].len())
            .sum()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        for j in 0..4 {
            self.w[j].write_flat(out);
            self.u[j].write_flat(out);
            out.extend_from_slice(&self.b[j]);
        }
    }

    fn read_flat(&mut self, src: &mut std::slice::Iter<'_, f64>) -> Result<()> {
        for j in 0..4 {
            self.w[j].read_flat(src)?;
            self.u[j].read_flat(src)?;
            take(src, &mut self.b[j])?;
        }
        Ok(())
    }
}

impl ParamFlat for DenseParams {
    fn flat_len(&self) -> usize {
        self.v.flat_len() + self.beta.len()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        self.v.write_flat(out);
        out.extend_from_slice(&self.beta);
    }

    fn read_flat(&mut self, src: &mut std::slice::Iter<'_, f64>) -> Result<()> {
        self.v.read_flat(src)?;
        take(src, &mut self.beta)
    }
}

impl<T: ParamFlat> ParamFlat for Vec<T> {
    fn flat_len(&self) -> usize {
        self.iter().map(|p| p.flat_len()).sum()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        for p in self {
            p.write_flat(out);
        }
    }

    fn read_flat(&mut self, src: &mut std::slice::Iter<'_, f64>) -> Result<()> {
        for p in self.iter_mut() {
            p.read_flat(src)?;
        }
        Ok(())
    }
}

fn check_shapes<T: ParamFlat>(params: &T, grads: &T) -> Result<()> {
    if params.flat_len() != grads.flat_len() {
        return Err(Error::dims(format!(
            "parameter/gradient lengths {} vs {}",
            params.flat_len(),
            grads.flat_len()
        )));
    }
    Ok(())
}

/// Plain gradient descent θ ← θ − α·∇L. α must be strictly positive.
pub fn sgd_step<T: ParamFlat>(params: &mut T, grads: &T, alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("learning rate must be > 0, got {alpha}")));
    }
    check_shapes(params, grads)?;
    let mut flat = params.to_flat();
    let g = grads.to_flat();
    for (p, g) in flat.iter_mut().zip(&g) {
        *p -= alpha * g;
    }
    params.load_flat(&flat)
}

/// First/second-moment state for [`adam_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(flat_len: usize) -> Self {
        AdamState {
            m: vec![0.0; flat_len],
            v: vec![0.0; flat_len],
            t: 0,
        }
    }

    pub fn for_params<T: ParamFlat>(params: &T) -> Self {
        Self::new(params.flat_len())
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// Adam update with bias correction. Deterministic; shapes never change.
pub fn adam_step<T: ParamFlat>(
    params: &mut T,
    grads: &T,
    state: &mut AdamState,
    alpha: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::invalid(format!("learning rate must be >= 0, got {alpha}")));
    }
    check_shapes(params, grads)?;
    if state.m.len() != params.flat_len() {
        return Err(Error::dims(format!(
            "optimizer state length {} expected {}",
            state.m.len(),
            params.flat_len()
        )));
    }
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    let mut flat = params.to_flat();
    let g = grads.to_flat();
    for k in 0..flat.len() {
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g[k];
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g[k] * g[k];
        let m_hat = state.m[k] / bc1;
        let v_hat = state.v[k] / bc2;
        flat[k] -= alpha * m_hat / (v_hat.sqrt() + eps);
    }
    params.load_flat(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip_preserves_everything() {
        let mut rng = crate::numerics::Rng::seeded(4);
        let p = LstmCellParams::init(3, 5, &mut rng);
        let flat = p.to_flat();
        assert_eq!(flat.len(), 4 * (5 * 3 + 5 * 5 + 5));
        let mut q = LstmCellParams::zeros(3, 5);
        q.load_flat(&flat).unwrap();
        assert_eq!(p, q);
        assert!(q.load_flat(&flat[1..]).is_err());
    }

    #[test]
    fn sgd_rejects_zero_alpha_and_applies_update() {
        let mut theta = Mat::zeros(1, 1);
        theta.set(0, 0, 2.0);
        let mut grad = Mat::zeros(1, 1);
        grad.set(0, 0, 3.0);
        assert!(sgd_step(&mut theta, &grad, 0.0).is_err());
        sgd_step(&mut theta, &grad, 0.1).unwrap();
        assert!((theta.get(0, 0) - 1.7).abs() < 1e-15);

        // grads = 0, alpha = 1 leaves parameters unchanged.
        let zero = Mat::zeros(1, 1);
        sgd_step(&mut theta, &zero, 1.0).unwrap();
        assert!((theta.get(0, 0) - 1.7).abs() < 1e-15);
    }

    #[test]
    fn sgd_quadratic_trajectory() {
        // L = θ²/2, ∇L = θ: after 100 steps of α = 0.1 from θ₀ = 1,
        // θ = 0.9^100.
        let mut theta = Mat::zeros(1, 1);
        theta.set(0, 0, 1.0);
        for _ in 0..100 {
            let mut grad = Mat::zeros(1, 1);
            grad.set(0, 0, theta.get(0, 0));
            sgd_step(&mut theta, &grad, 0.1).unwrap();
        }
        let expected = 0.9f64.powi(100);
        let got = theta.get(0, 0);
        assert!(
            ((got - expected) / expected).abs() < 1e-12,
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn adam_zero_gradients_leave_params_unchanged() {
        let mut theta = Mat::zeros(2, 2);
        theta.set(0, 1, 1.25);
        let before = theta.clone();
        let mut state = AdamState::for_params(&theta);
        adam_step(&mut theta, &Mat::zeros(2, 2), &mut state, 1e-3, 0.9, 0.999, 1e-8).unwrap();
        assert_eq!(theta, before);
    }

    #[test]
    fn adam_first_step_magnitude_is_alpha() {
        for g in [3.0, -0.004, 1e6] {
            let mut theta = Mat::zeros(1, 1);
            let mut grad = Mat::zeros(1, 1);
            grad.set(0, 0, g);
            let mut state = AdamState::for_params(&theta);
            adam_step(&mut theta, &grad, &mut state, 0.01, 0.9, 0.999, 1e-8).unwrap();
            let step = theta.get(0, 0);
            // Bias-corrected ratio is sign(g) up to the eps term.
            assert!((step.abs() - 0.01).abs() < 1e-5, "g = {g}: step {step}");
            assert_eq!(step.signum(), -g.signum());
        }
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut theta = Mat::zeros(1, 2);
            let mut state = AdamState::for_params(&theta);
            for k in 0..10 {
                let mut grad = Mat::zeros(1, 2);
                grad.set(0, 0, (k as f64).sin());
                grad.set(0, 1, (k as f64).cos());
                adam_step(&mut theta, &grad, &mut state, 1e-2, 0.9, 0.999, 1e-8).unwrap();
            }
            theta
        };
        assert_eq!(run(), run());
    }
}
