//! Complex vectors/matrices, dominant-eigenpair extraction, and seeded
//! sampling shared by the simulator and both trackers.

mod cvec;
mod eig;
mod herm;
mod mat;
mod rng;

pub use cvec::CVec;
pub use eig::{canonical_phase, herm_eig_max};
pub use herm::{HermMat, HERM_TOL};
pub use mat::{dot, Mat};
pub use rng::{Rng, PRNG_ID};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Circularly-symmetric complex Gaussian scalar: independent real and
/// imaginary parts, each N(0, variance/2), so E|z|² = variance.
pub fn sample_complex_gaussian(rng: &mut Rng, variance: f64) -> Result<Complex64> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(Error::invalid(format!("variance must be >= 0, got {variance}")));
    }
    let (re, im) = rng.normal_pair();
    let sigma = (variance / 2.0).sqrt();
    Ok(Complex64::new(sigma * re, sigma * im))
}

/// Real Gaussian scalar N(0, variance).
pub fn sample_real_gaussian(rng: &mut Rng, variance: f64) -> Result<f64> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(Error::invalid(format!("variance must be >= 0, got {variance}")));
    }
    Ok(variance.sqrt() * rng.normal())
}

/// Length-m vector with entries drawn equally likely from {−1, +1} (zero
/// imaginary part) — the probe signal distribution.
pub fn sample_rademacher_vec(rng: &mut Rng, m: usize) -> Result<CVec> {
    if m == 0 {
        return Err(Error::invalid("Rademacher vector length must be >= 1"));
    }
    CVec::new(
        (0..m)
            .map(|_| {
                let sign = if rng.next_u64() & 1 == 1 { 1.0 } else { -1.0 };
                Complex64::new(sign, 0.0)
            })
            .collect(),
    )
}
