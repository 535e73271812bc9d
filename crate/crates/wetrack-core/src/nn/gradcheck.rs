//! Central-difference gradient verification.

use crate::error::{Error, Result};

use super::ParamFlat;

/// Central differences at ε ≈ 1e-6 on an O(1)-magnitude f64 loss carry an
/// absolute roundoff of roughly machine-eps·|loss internals|/ε ≈ 1e-9.
/// A gradient pair with both sides below this floor is indistinguishable
/// from zero by the measurement and is reported as exact; comparing it would
/// measure FD resolution, not gradient correctness (nearly-disconnected
/// parameters, e.g. recurrent weights feeding zero initial states, sit
/// orders of magnitude below it).
const FD_NOISE_FLOOR: f64 = 2e-5;

/// Compare an analytic gradient against central finite differences,
/// parameter by parameter. Returns the maximum relative error with
/// denominator max(|analytic|, |numeric|, 1e-8); components with both sides
/// under [`FD_NOISE_FLOOR`] contribute zero.
///
/// `loss` must be twice differentiable at `params` and finite everywhere it
/// is evaluated; `analytic` returns the gradient in the same container shape.
pub fn grad_check<T, L, A>(params: &T, epsilon: f64, loss: L, analytic: A) -> Result<f64>
where
    T: ParamFlat + Clone,
    L: Fn(&T) -> Result<f64>,
    A: FnOnce(&T) -> Result<T>,
{
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    let analytic_flat = analytic(params)?.to_flat();
    if analytic_flat.len() != params.flat_len() {
        return Err(Error::dims("analytic gradient shape differs from parameters"));
    }

    let base = params.to_flat();
    let mut probe = params.clone();
    let mut max_rel = 0.0;
    for k in 0..base.len() {
        let mut flat = base.clone();
        flat[k] = base[k] + epsilon;
        probe.load_flat(&flat)?;
        let plus = loss(&probe)?;
        flat[k] = base[k] - epsilon;
        probe.load_flat(&flat)?;
        let minus = loss(&probe)?;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::invalid(format!(
                "non-finite loss while perturbing parameter {k}"
            )));
        }
        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic_flat[k];
        if a.abs() <= FD_NOISE_FLOOR && numeric.abs() <= FD_NOISE_FLOOR {
            continue;
        }
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}
