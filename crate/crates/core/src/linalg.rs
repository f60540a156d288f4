//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

/// Singular values at or below `ε · max(rows, cols) · σ_max` (after column
/// equilibration) count as rank loss, as in LAPACK's `gelsd` default.
pub fn rank_cutoff(rows: usize, cols: usize, smax: f64) -> f64 {
    f64::EPSILON * rows.max(cols) as f64 * smax
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDeficient {
    pub rank: usize,
    pub cols: usize,
}

/// Ordinary least squares `min ‖A x - b‖₂` by SVD of the column-equilibrated
/// matrix. Refuses numerically rank-deficient problems.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, RankDeficient> {
    let cols = a.ncols();
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) || a.nrows() < cols {
        let rank = norms.iter().filter(|&&n| n > 0.0 && n.is_finite()).count();
        return Err(RankDeficient {
            rank: rank.min(a.nrows()),
            cols,
        });
    }
    let mut scaled = a.clone();
    for (j, mut c) in scaled.column_iter_mut().enumerate() {
        c /= norms[j];
    }
    let svd = scaled.svd(true, true);
    let cutoff = rank_cutoff(a.nrows(), cols, svd.singular_values.max());
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < cols {
        return Err(RankDeficient { rank, cols });
    }
    let mut x = svd.solve(b, 0.0).map_err(|_| RankDeficient { rank, cols })?;
    for (j, v) in x.iter_mut().enumerate() {
        *v /= norms[j];
    }
    Ok(x)
}

/// Minimum-norm least squares with singular values below [`rank_cutoff`]
/// truncated.
///
/// Returns the solution and the numerical rank. Zero or non-finite columns
/// are refused.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, usize), RankDeficient> {
    let cols = a.ncols();
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        let rank = norms.iter().filter(|&&n| n > 0.0 && n.is_finite()).count();
        return Err(RankDeficient {
            rank: rank.min(a.nrows()),
            cols,
        });
    }
    let mut scaled = a.clone();
    for (j, mut c) in scaled.column_iter_mut().enumerate() {
        c /= norms[j];
    }
    let svd = scaled.svd(true, true);
    let cutoff = rank_cutoff(a.nrows(), cols, svd.singular_values.max());
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let mut x = svd.solve(b, cutoff).map_err(|_| RankDeficient { rank, cols })?;
    for (j, v) in x.iter_mut().enumerate() {
        *v /= norms[j];
    }
    Ok((x, rank))
}

/// Diagonal similarity scaling by powers of two that roughly equalizes row
/// and column norms; eigenvalues are unchanged.
pub fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    const RADIX: f64 = 2.0;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let g = r / RADIX;
            while cc < g {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            let g = r * RADIX;
            while cc > g {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r / f) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a real square matrix via balancing + real Schur form.
///
/// Complex eigenvalues come out as exact conjugate pairs (from the 2×2
/// diagonal blocks).
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let mut b = m.clone();
    balance(&mut b);
    let schur = Schur::try_new(b, f64::EPSILON, 10_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}
