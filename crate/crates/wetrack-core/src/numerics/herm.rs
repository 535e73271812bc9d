use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::CVec;

/// Absolute tolerance for accepting an almost-Hermitian input.
pub const HERM_TOL: f64 = 1e-12;

/// M×M Hermitian matrix (channel / signal Gram matrices).
///
/// Construction validates conjugate symmetry to [`HERM_TOL`] and then
/// canonicalizes storage (real diagonal, lower triangle = conj(upper)), so a
/// stored matrix is exactly Hermitian bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMat {
    m: usize,
    data: Vec<Complex64>, // row-major
}

impl HermMat {
    pub fn new(m: usize, entries: Vec<Complex64>) -> Result<Self> {
        if m == 0 || entries.len() != m * m {
            return Err(Error::dims(format!(
                "expected {}x{m} entries, got {}",
                m,
                entries.len()
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        for i in 0..m {
            if entries[i * m + i].im.abs() > HERM_TOL {
                return Err(Error::invalid(format!(
                    "diagonal entry ({i},{i}) has imaginary part {}",
                    entries[i * m + i].im
                )));
            }
            for j in (i + 1)..m {
                let upper = entries[i * m + j];
                let lower = entries[j * m + i];
                let gap = (upper - lower.conj()).norm();
                if gap > HERM_TOL {
                    return Err(Error::invalid(format!(
                        "entries ({i},{j})/({j},{i}) violate conjugate symmetry by {gap}"
                    )));
                }
            }
        }
        let mut data = entries;
        for i in 0..m {
            data[i * m + i] = Complex64::new(data[i * m + i].re, 0.0);
            for j in (i + 1)..m {
                data[j * m + i] = data[i * m + j].conj();
            }
        }
        Ok(HermMat { m, data })
    }

    /// Build from the diagonal (real) and strict upper triangle; the lower
    /// triangle is mirrored, so the result is Hermitian by construction.
    pub fn from_parts(diag: &[f64], upper: &[Complex64]) -> Result<Self> {
        let m = diag.len();
        if m == 0 {
            return Err(Error::dims("matrix order must be >= 1"));
        }
        if upper.len() != m * (m - 1) / 2 {
            return Err(Error::dims(format!(
                "expected {} strict-upper entries, got {}",
                m * (m - 1) / 2,
                upper.len()
            )));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); m * m];
        let mut k = 0;
        for i in 0..m {
            data[i * m + i] = Complex64::new(diag[i], 0.0);
            for j in (i + 1)..m {
                data[i * m + j] = upper[k];
                data[j * m + i] = upper[k].conj();
                k += 1;
            }
        }
        let mat = HermMat { m, data };
        if !mat.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(mat)
    }

    /// Outer product h·h^H (exactly Hermitian in floating point).
    pub fn from_outer(h: &CVec) -> Self {
        let m = h.len();
        let mut data = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                data.push(h.get(i) * h.get(j).conj());
            }
        }
        HermMat { m, data }
    }

    pub fn identity(m: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            data[i * m + i] = Complex64::new(1.0, 0.0);
        }
        HermMat { m, data }
    }

    pub fn zeros(m: usize) -> Self {
        HermMat {
            m,
            data: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.m + j]
    }

    pub fn matvec(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.m {
            return Err(Error::dims(format!(
                "matrix order {} vs vector length {}",
                self.m,
                x.len()
            )));
        }
        let mut out = Vec::with_capacity(self.m);
        for i in 0..self.m {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.m {
                acc += self.data[i * self.m + j] * x.get(j);
            }
            out.push(acc);
        }
        CVec::new(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.m).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Squared Frobenius distance ‖self − other‖²_F.
    pub fn dist_sqr(&self, other: &HermMat) -> Result<f64> {
        if self.m != other.m {
            return Err(Error::dims("matrix orders differ"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }

    /// self + factor·other, elementwise.
    pub fn add_scaled(&self, other: &HermMat, factor: f64) -> Result<HermMat> {
        if self.m != other.m {
            return Err(Error::dims("matrix orders differ"));
        }
        Ok(HermMat {
            m: self.m,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b * factor)
                .collect(),
        })
    }
}
