use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poles::{Pole, PoleSet};
use crate::error::{Error, Result};
use crate::linalg::real_eigenvalues;

/// Next-iteration poles: the zeros of `h(s) = 1 + Σ λ_i/(s+p_i)`.
///
/// The zeros are the eigenvalues of `A − b·cᵀ` for a real realization
/// `(A, b, c)` of `h − 1`: `A = diag(−p_i)` with `b_i = 1, c_i = λ_i` for
/// real poles, and for a pair `p = σ + jβ` the block
/// `[[−σ, −β], [β, −σ]]` with `b = (2, 0)`, `c = (Re λ, Im λ)`.
/// Zeros in the closed right half-plane are mirrored into the left one.
pub fn relocate_poles(poles: &PoleSet, lambda: &[Complex64]) -> Result<PoleSet> {
    let n = poles.order();
    if lambda.len() != n {
        return Err(Error::Dimension(format!("{} residues for {n} poles", lambda.len())));
    }
    let c = poles.realify_coefficients(lambda);
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = vec![0.0; n];
    let mut k = 0;
    for e in poles.entries() {
        match *e {
            Pole::Real(p) => {
                a[(k, k)] = -p;
                b[k] = 1.0;
                k += 1;
            }
            Pole::Pair(p) => {
                a[(k, k)] = -p.re;
                a[(k, k + 1)] = -p.im;
                a[(k + 1, k)] = p.im;
                a[(k + 1, k + 1)] = -p.re;
                b[k] = 2.0;
                k += 2;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= b[i] * c[j];
        }
    }
    let zeros = real_eigenvalues(&a).ok_or(Error::EigenNonConvergence(n))?;
    let next: Vec<Complex64> = zeros.into_iter().map(|z| reflect(-z)).collect();
    PoleSet::from_conjugate_closed(&next, 0.0)
}

/// Moves `p` to `Re p > 0`.
fn reflect(p: Complex64) -> Complex64 {
    let re = if p.re > 0.0 {
        p.re
    } else {
        // a zero exactly on the imaginary axis gets the smallest usable damping
        (-p.re).max(f64::EPSILON * p.norm()).max(f64::MIN_POSITIVE)
    };
    Complex64::new(re, p.im)
}
