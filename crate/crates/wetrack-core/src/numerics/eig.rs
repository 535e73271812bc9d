//! Dominant eigenpair of a Hermitian matrix.
//!
//! Only the algebraically largest eigenvalue and one unit eigenvector are
//! ever needed (rank-one Gram extraction), so this is a closed form for
//! M ≤ 2 plus a shifted power iteration for M > 2 — no general
//! eigendecomposition.
//!
//! Shift choice: iterating on B = H + s·I with s = ‖H‖_F makes every shifted
//! eigenvalue nonnegative (|λ_i| ≤ ‖H‖_F), so the algebraic maximum of H is
//! also the magnitude maximum of B and the iteration cannot lock onto a
//! large-magnitude negative eigenvalue.
//!
//! Tie-break for a degenerate top eigenvalue: the smallest-index standard
//! basis vector inside the dominant eigenspace. The returned eigenvector is
//! phase-canonicalized: its largest-magnitude entry (first index on ties) is
//! real and nonnegative.

use num_complex::Complex64;

use crate::numerics::{CVec, HermMat};

const POWER_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 10_000;

/// (λ₁, u₁) with λ₁ the algebraically largest eigenvalue, ‖u₁‖ = 1, residual
/// ‖H·u₁ − λ₁·u₁‖ ≤ 1e-9·max(1, |λ₁|) for matrices with a spectral gap.
pub fn herm_eig_max(h: &HermMat) -> (f64, CVec) {
    let m = h.order();
    let (lambda, vec) = match m {
        1 => (h.get(0, 0).re, CVec::basis(1, 0)),
        2 => eig_max_2x2(h),
        _ => eig_max_power(h),
    };
    let vec = prefer_basis_vector(h, lambda, vec);
    (lambda, canonical_phase(vec))
}

fn eig_max_2x2(h: &HermMat) -> (f64, CVec) {
    let a = h.get(0, 0).re;
    let c = h.get(1, 1).re;
    let b = h.get(0, 1);
    let half_diff = 0.5 * (a - c);
    let disc = (half_diff * half_diff + b.norm_sqr()).sqrt();
    let lambda = 0.5 * (a + c) + disc;

    let scale = a.abs().max(c.abs()).max(b.norm()).max(1.0);
    if disc <= POWER_TOL * scale {
        // Degenerate spectrum: every direction is dominant.
        return (lambda, CVec::basis(2, 0));
    }
    if b.norm() <= POWER_TOL * scale {
        let idx = if a >= c { 0 } else { 1 };
        return (lambda, CVec::basis(2, idx));
    }
    // Pick whichever closed-form eigenvector expression is better
    // conditioned for this sign of (a − c).
    let v = if a >= c {
        vec![Complex64::new(lambda - c, 0.0), b.conj()]
    } else {
        vec![b, Complex64::new(lambda - a, 0.0)]
    };
    (lambda, normalize(v))
}

fn eig_max_power(h: &HermMat) -> (f64, CVec) {
    let m = h.order();
    let fro = h.frobenius_norm();
    if fro == 0.0 {
        return (0.0, CVec::basis(m, 0));
    }

    // Deterministic dense start vector (fixed LCG) so every entry of every
    // eigenspace gets a nonzero component with probability 1.
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v = normalize((0..m).map(|_| Complex64::new(next(), next())).collect());

    let mut lambda = rayleigh(h, &v);
    for _ in 0..MAX_ITERS {
        // One step of v ← (H + fro·I)v, renormalized.
        let hv = h.matvec(&v).expect("order checked");
        let shifted: Vec<Complex64> = (0..m)
            .map(|i| hv.get(i) + v.get(i) * fro)
            .collect();
        v = normalize(shifted);
        lambda = rayleigh(h, &v);
        if residual(h, lambda, &v) <= POWER_TOL * fro.max(1.0) {
            break;
        }
    }
    (lambda, v)
}

/// If a standard basis vector lies in the eigenspace of λ (to the contract
/// tolerance), return the smallest-index one; this realizes the documented
/// degenerate-spectrum tie-break and is a no-op for generic matrices.
fn prefer_basis_vector(h: &HermMat, lambda: f64, fallback: CVec) -> CVec {
    let m = h.order();
    let tol = 1e-9 * lambda.abs().max(1.0);
    for i in 0..m {
        let e = CVec::basis(m, i);
        if residual(h, lambda, &e) <= tol {
            return e;
        }
    }
    fallback
}

fn rayleigh(h: &HermMat, v: &CVec) -> f64 {
    let hv = h.matvec(v).expect("order checked");
    v.hdot(&hv).expect("same length").re / v.norm_sqr()
}

fn residual(h: &HermMat, lambda: f64, v: &CVec) -> f64 {
    let hv = h.matvec(v).expect("order checked");
    (0..v.len())
        .map(|i| (hv.get(i) - v.get(i) * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn normalize(entries: Vec<Complex64>) -> CVec {
    let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CVec::new(entries.into_iter().map(|z| z / norm).collect()).expect("finite by construction")
}

/// Rotate a unit vector so its largest-magnitude entry (first on ties) is
/// real and nonnegative.
pub fn canonical_phase(v: CVec) -> CVec {
    let mut best = 0;
    let mut best_mag = -1.0;
    for i in 0..v.len() {
        let mag = v.get(i).norm();
        if mag > best_mag + 1e-15 {
            best = i;
            best_mag = mag;
        }
    }
    let pivot = v.get(best);
    if pivot.norm() == 0.0 {
        return v;
    }
    v.scaled(pivot.conj() / pivot.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(entries: &[f64]) -> HermMat {
        let m = entries.len();
        HermMat::from_parts(entries, &vec![c(0.0, 0.0); m * (m - 1) / 2]).unwrap()
    }

    #[test]
    fn diagonal_two_by_two() {
        let (lambda, u) = herm_eig_max(&diag(&[2.0, 1.0]));
        assert!((lambda - 2.0).abs() < 1e-12);
        assert!((u.get(0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(u.get(1).norm() < 1e-12);
    }

    #[test]
    fn rank_one_outer_product_recovers_direction() {
        // h = (1, i): λ₁ = ‖h‖² = 2, u₁ = h/√2 after canonical phase.
        let h = CVec::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let (lambda, u) = herm_eig_max(&HermMat::from_outer(&h));
        assert!((lambda - 2.0).abs() < 1e-12);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u.get(0) - c(inv_sqrt2, 0.0)).norm() < 1e-12);
        assert!((u.get(1) - c(0.0, inv_sqrt2)).norm() < 1e-12);
    }

    #[test]
    fn identity_ties_break_to_first_basis_vector() {
        let (lambda, u) = herm_eig_max(&HermMat::identity(2));
        assert!((lambda - 1.0).abs() < 1e-12);
        assert_eq!(u, CVec::basis(2, 0));

        let (lambda, u) = herm_eig_max(&HermMat::identity(4));
        assert!((lambda - 1.0).abs() < 1e-12);
        assert_eq!(u, CVec::basis(4, 0));
    }

    #[test]
    fn indefinite_matrix_returns_algebraic_max() {
        // Magnitude max is −3; algebraic max is 1. Guards the shift choice.
        let (lambda, u) = herm_eig_max(&diag(&[1.0, -3.0, 0.0]));
        assert!((lambda - 1.0).abs() < 1e-9, "lambda {lambda}");
        assert_eq!(u, CVec::basis(3, 0));
    }

    /// Gram-Schmidt orthonormalization of random complex vectors (test-side
    /// construction for spectral tests).
    fn random_orthonormal(m: usize, count: usize, rng: &mut Rng) -> Vec<CVec> {
        let mut basis: Vec<CVec> = Vec::new();
        while basis.len() < count {
            let mut v: Vec<Complex64> = (0..m)
                .map(|_| {
                    let (re, im) = rng.normal_pair();
                    c(re, im)
                })
                .collect();
            for b in &basis {
                let overlap = b
                    .hdot(&CVec::new(v.clone()).unwrap())
                    .unwrap();
                for i in 0..m {
                    v[i] -= b.get(i) * overlap;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                basis.push(CVec::new(v.into_iter().map(|z| z / norm).collect()).unwrap());
            }
        }
        basis
    }

    fn spectral_sum(m: usize, coeffs: &[f64], vecs: &[CVec]) -> HermMat {
        let mut acc = HermMat::zeros(m);
        for (cval, v) in coeffs.iter().zip(vecs) {
            acc = acc.add_scaled(&HermMat::from_outer(v), *cval).unwrap();
        }
        // Re-run through the validating constructor to canonicalize.
        let entries: Vec<Complex64> = (0..m * m)
            .map(|k| acc.get(k / m, k % m))
            .collect();
        HermMat::new(m, entries).unwrap()
    }

    #[test]
    fn spectral_construction_recovers_top_pair() {
        let mut rng = Rng::seeded(2024);
        for m in [3usize, 4, 6] {
            for _ in 0..20 {
                let vecs = random_orthonormal(m, m, &mut rng);
                let mut coeffs: Vec<f64> =
                    (0..m).map(|_| rng.uniform_in(0.0, 1.0)).collect();
                coeffs.sort_by(|a, b| b.partial_cmp(a).unwrap());
                coeffs[0] = 1.5 + rng.uniform_in(0.0, 1.0); // enforce a gap
                let h = spectral_sum(m, &coeffs, &vecs);

                let (lambda, u) = herm_eig_max(&h);
                assert!(
                    (lambda - coeffs[0]).abs() <= 1e-9 * coeffs[0].max(1.0),
                    "m={m} lambda {lambda} vs {}",
                    coeffs[0]
                );
                let overlap = u.hdot(&vecs[0]).unwrap().norm();
                assert!(overlap > 1.0 - 1e-8, "m={m} overlap {overlap}");
                let hu = h.matvec(&u).unwrap();
                let resid = (0..m)
                    .map(|i| (hu.get(i) - u.get(i) * lambda).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(resid <= 1e-9 * lambda.max(1.0), "residual {resid}");
            }
        }
    }

    #[test]
    fn rayleigh_quotient_bound() {
        let mut rng = Rng::seeded(7);
        for m in [2usize, 3, 5] {
            // Random Hermitian via (A + A^H)/2, built exactly from parts.
            let diag_vals: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
            let upper: Vec<Complex64> = (0..m * (m - 1) / 2)
                .map(|_| {
                    let (re, im) = rng.normal_pair();
                    c(re, im)
                })
                .collect();
            let h = HermMat::from_parts(&diag_vals, &upper).unwrap();
            let (lambda, _) = herm_eig_max(&h);
            for _ in 0..1000 {
                let x = {
                    let v: Vec<Complex64> = (0..m)
                        .map(|_| {
                            let (re, im) = rng.normal_pair();
                            c(re, im)
                        })
                        .collect();
                    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    CVec::new(v.into_iter().map(|z| z / norm).collect()).unwrap()
                };
                let quad = x.hdot(&h.matvec(&x).unwrap()).unwrap().re;
                assert!(
                    lambda >= quad - 1e-9 * lambda.abs().max(1.0),
                    "m={m}: Rayleigh quotient {quad} exceeds lambda {lambda}"
                );
            }
        }
    }
}
