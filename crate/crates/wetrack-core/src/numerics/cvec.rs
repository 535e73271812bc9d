use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex column vector of length M (channel or signal coefficients).
///
/// Entries are always finite; constructors reject NaN/Inf.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec {
    entries: Vec<Complex64>,
}

impl CVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("CVec must have length >= 1"));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("CVec entries must be finite"));
        }
        Ok(CVec { entries })
    }

    pub fn zeros(m: usize) -> Self {
        CVec {
            entries: vec![Complex64::new(0.0, 0.0); m.max(1)],
        }
    }

    /// Standard basis vector e_i (zero-indexed).
    pub fn basis(m: usize, i: usize) -> Self {
        let mut v = Self::zeros(m);
        v.entries[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.entries.iter()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.entries[i]
    }

    /// Unconjugated product xᵀy = Σ x_i y_i (the beamforming inner product).
    pub fn tdot(&self, other: &CVec) -> Result<Complex64> {
        self.check_len(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Hermitian product x^H y = Σ conj(x_i) y_i.
    pub fn hdot(&self, other: &CVec) -> Result<Complex64> {
        self.check_len(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> CVec {
        CVec {
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> CVec {
        CVec {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &CVec) -> Result<CVec> {
        self.check_len(other)?;
        Ok(CVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CVec) -> Result<CVec> {
        self.check_len(other)?;
        Ok(CVec {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Real/imaginary split: M real parts followed by M imaginary parts.
    /// This is the fixed convention wherever a channel enters or leaves a
    /// real-valued network.
    pub fn to_reals(&self) -> Vec<f64> {
        let m = self.len();
        let mut out = Vec::with_capacity(2 * m);
        out.extend(self.entries.iter().map(|z| z.re));
        out.extend(self.entries.iter().map(|z| z.im));
        out
    }

    /// Inverse of [`CVec::to_reals`]; `reals.len()` must be even.
    pub fn from_reals(reals: &[f64]) -> Result<CVec> {
        if reals.is_empty() || reals.len() % 2 != 0 {
            return Err(Error::dims(format!(
                "real/imag split needs an even, nonzero length, got {}",
                reals.len()
            )));
        }
        let m = reals.len() / 2;
        CVec::new(
            (0..m)
                .map(|i| Complex64::new(reals[i], reals[m + i]))
                .collect(),
        )
    }

    fn check_len(&self, other: &CVec) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::dims(format!(
                "vector lengths {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}
