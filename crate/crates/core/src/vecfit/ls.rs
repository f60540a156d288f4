//! Linearized identification step.
//!
//! With auxiliary poles `p_i` fixed, the rational fit `S ≈ H/h` becomes the
//! linear problem
//!
//! ```text
//! Σ μ_i/(s+p_i) [+ d] − S(s)·Σ λ_i/(s+p_i) = S(s)
//! ```
//!
//! stacked over the grid with real and imaginary parts as separate rows and
//! conjugate pairs realified so that every unknown is real.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::grid::SamplingGrid;
use super::poles::PoleSet;
use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, RankDeficient};

/// Residues of the two auxiliary functions `H(s) = Σ μ_i/(s+p_i) [+ d]` and
/// `h(s) = 1 + Σ λ_i/(s+p_i)`, one entry per scalar pole.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSolution {
    pub mu: Vec<Complex64>,
    pub lambda: Vec<Complex64>,
    pub direct: Option<f64>,
    /// Numerical rank of `Φ`.
    pub rank: usize,
}

impl AuxSolution {
    /// `‖λ‖₂`: zero exactly when the auxiliary poles already fit the target.
    pub fn lambda_norm(&self) -> f64 {
        self.lambda.iter().map(|l| l.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Builds `Φ` (`2L × (2(N+1) [+1])`) and `Y` (`2L`).
///
/// Rows `0..L` hold real parts, rows `L..2L` imaginary parts. Columns are
/// `[μ basis | direct | λ basis]`.
pub fn assemble_ls(
    grid: &SamplingGrid,
    target: &[Complex64],
    poles: &PoleSet,
    with_direct: bool,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let rows = grid.len();
    if target.len() != rows {
        return Err(Error::Dimension(format!(
            "{} target samples for a {}-point grid",
            target.len(),
            rows
        )));
    }
    let n = poles.order();
    let extra = usize::from(with_direct);
    let cols = 2 * n + extra;
    let mut phi = DMatrix::<f64>::zeros(2 * rows, cols);
    let mut y = DVector::<f64>::zeros(2 * rows);
    for (l, (s, &t)) in grid.points().zip(target).enumerate() {
        let basis = poles.basis(s);
        for (i, &b) in basis.iter().enumerate() {
            phi[(l, i)] = b.re;
            phi[(rows + l, i)] = b.im;
            let scaled = -t * b;
            phi[(l, n + extra + i)] = scaled.re;
            phi[(rows + l, n + extra + i)] = scaled.im;
        }
        if with_direct {
            phi[(l, n)] = 1.0;
        }
        y[l] = t.re;
        y[rows + l] = t.im;
    }
    Ok((phi, y))
}

/// Least-squares solution of `Φ θ ≈ Y`, mapped back to complex residues.
pub fn solve_ls(phi: &DMatrix<f64>, y: &DVector<f64>, poles: &PoleSet, with_direct: bool) -> Result<AuxSolution> {
    let n = poles.order();
    let extra = usize::from(with_direct);
    if phi.ncols() != 2 * n + extra || phi.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "Φ is {}x{}, Y has {} rows, pole order {n}",
            phi.nrows(),
            phi.ncols(),
            y.len()
        )));
    }
    let (theta, rank) = solve(phi, y, poles)?;
    let theta = theta.as_slice();
    Ok(AuxSolution {
        mu: poles.expand_coefficients(&theta[..n]),
        direct: with_direct.then(|| theta[n]),
        lambda: poles.expand_coefficients(&theta[n + extra..]),
        rank,
    })
}

/// Fixed-pole residue fit: `min Σ |S(s_l) − Σ c_i/(s_l+p_i) [− d]|²`.
pub fn fit_residues(
    grid: &SamplingGrid,
    target: &[Complex64],
    poles: &PoleSet,
    with_direct: bool,
) -> Result<(Vec<Complex64>, Option<f64>)> {
    let rows = grid.len();
    if target.len() != rows {
        return Err(Error::Dimension(format!(
            "{} target samples for a {}-point grid",
            target.len(),
            rows
        )));
    }
    let n = poles.order();
    let cols = n + usize::from(with_direct);
    let mut phi = DMatrix::<f64>::zeros(2 * rows, cols);
    let mut y = DVector::<f64>::zeros(2 * rows);
    for (l, (s, &t)) in grid.points().zip(target).enumerate() {
        for (i, b) in poles.basis(s).into_iter().enumerate() {
            phi[(l, i)] = b.re;
            phi[(rows + l, i)] = b.im;
        }
        if with_direct {
            phi[(l, n)] = 1.0;
        }
        y[l] = t.re;
        y[rows + l] = t.im;
    }
    let (theta, _) = solve(&phi, &y, poles)?;
    let theta = theta.as_slice();
    Ok((poles.expand_coefficients(&theta[..n]), with_direct.then(|| theta[n])))
}

/// Coincident poles make the basis structurally singular and are refused.
/// Merely ill-conditioned bases, common when poles crowd one end of a
/// six-decade grid, get the minimum-norm solution.
fn solve(phi: &DMatrix<f64>, y: &DVector<f64>, poles: &PoleSet) -> Result<(DVector<f64>, usize)> {
    let conditioning = |e: RankDeficient| Error::Conditioning {
        rank: e.rank,
        cols: e.cols,
        poles: poles.expanded(),
    };
    let (theta, rank) = lstsq_min_norm(phi, y).map_err(conditioning)?;
    if rank < phi.ncols() && poles.has_duplicates(COINCIDENT_POLES) {
        return Err(conditioning(RankDeficient {
            rank,
            cols: phi.ncols(),
        }));
    }
    Ok((theta, rank))
}

/// Relative distance below which two poles count as coincident.
pub const COINCIDENT_POLES: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecfit::grid::make_grid;
    use crate::vecfit::poles::Pole;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_real_pole_layout() {
        let grid = SamplingGrid::from_frequencies(vec![0.5, 2.0]).unwrap();
        let target: Vec<Complex64> = grid.sample(|s| 1.0 / s.sqrt());
        let poles = PoleSet::real(&[1.0]).unwrap();
        let (phi, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        assert_eq!(phi.shape(), (4, 2));
        for (l, s) in grid.points().enumerate() {
            let b = 1.0 / (s + 1.0);
            let g = -target[l] * b;
            assert_eq!(phi[(l, 0)], b.re);
            assert_eq!(phi[(2 + l, 0)], b.im);
            assert_eq!(phi[(l, 1)], g.re);
            assert_eq!(phi[(2 + l, 1)], g.im);
            assert_eq!(y[l], target[l].re);
            assert_eq!(y[2 + l], target[l].im);
        }
    }

    #[test]
    fn real_target_at_real_point_has_zero_imag_rows() {
        // a sample point on the real axis: s = 0 + j·0 is excluded, so use a
        // target whose value is real at the chosen frequency
        let grid = SamplingGrid::from_frequencies(vec![1.0, 2.0]).unwrap();
        let target = vec![c(3.0, 0.0), c(1.0, -1.0)];
        let poles = PoleSet::real(&[1.0]).unwrap();
        let (_, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        assert_eq!(y[2], 0.0);
    }

    #[test]
    fn conjugate_pair_recovers_conjugate_mu() {
        let grid = make_grid(0.1, 10.0, 20).unwrap();
        let p = c(1.0, 2.0);
        let r = c(0.3, -0.8);
        let target = grid.sample(|s| r / (s + p) + r.conj() / (s + p.conj()));
        let poles = PoleSet::new(vec![Pole::Pair(p)]).unwrap();
        let (phi, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        let sol = solve_ls(&phi, &y, &poles, false).unwrap();
        assert_eq!(sol.mu[0], sol.mu[1].conj());
        assert!((sol.mu[0] - r).norm() < 1e-12);
        assert!(sol.lambda_norm() < 1e-12);
    }

    #[test]
    fn square_system_solved_exactly() {
        let grid = SamplingGrid::from_frequencies(vec![0.5, 2.0]).unwrap();
        let target = grid.sample(|s| 1.0 / (s + 3.0) + 0.1 * s);
        let poles = PoleSet::real(&[1.0, 2.0]).unwrap();
        let (phi, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        assert_eq!(phi.shape(), (4, 4));
        let sol = solve_ls(&phi, &y, &poles, false).unwrap();
        let theta: Vec<f64> = sol.mu.iter().chain(&sol.lambda).map(|v| v.re).collect();
        let res = &phi * DVector::from_vec(theta) - &y;
        assert!(res.norm() < 1e-12);
    }

    #[test]
    fn hand_algebra_single_pole() {
        // μ₀(s+2) = s+1+λ₀  ⇒  μ₀ = 1, λ₀ = 1
        let grid = make_grid(0.01, 100.0, 10).unwrap();
        let target = grid.sample(|s| 1.0 / (s + 2.0));
        let poles = PoleSet::real(&[1.0]).unwrap();
        let (phi, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        let sol = solve_ls(&phi, &y, &poles, false).unwrap();
        assert!((sol.mu[0] - 1.0).norm() < 1e-12);
        assert!((sol.lambda[0] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn exact_poles_give_zero_lambda() {
        let grid = make_grid(1e-3, 1e3, 60).unwrap();
        let target = grid.sample(|s| 2.0 / (s + 0.5) - 1.0 / (s + 7.0) + 0.25 / (s + 40.0));
        let poles = PoleSet::real(&[0.5, 7.0, 40.0]).unwrap();
        let (phi, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        let sol = solve_ls(&phi, &y, &poles, false).unwrap();
        assert!(sol.lambda_norm() < 1e-10);
        assert!((sol.mu[1] + 1.0).norm() < 1e-9);
    }

    #[test]
    fn duplicate_poles_are_rank_deficient() {
        let grid = make_grid(1e-2, 1e2, 30).unwrap();
        let target = grid.sample(|s| 1.0 / s.sqrt());
        let poles = PoleSet::real(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            fit_residues(&grid, &target, &poles, false),
            Err(Error::Conditioning { .. })
        ));
        let (phi, y) = assemble_ls(&grid, &target, &poles, false).unwrap();
        assert!(matches!(
            solve_ls(&phi, &y, &poles, false),
            Err(Error::Conditioning { .. })
        ));
    }

    #[test]
    fn residue_fit_with_direct() {
        let grid = make_grid(1e-2, 1e2, 30).unwrap();
        let target = grid.sample(|s| 0.5 + 3.0 / (s + 2.0));
        let poles = PoleSet::real(&[2.0]).unwrap();
        let (res, d) = fit_residues(&grid, &target, &poles, true).unwrap();
        assert!((res[0] - 3.0).norm() < 1e-12);
        assert!((d.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn target_length_mismatch() {
        let grid = make_grid(1e-2, 1e2, 30).unwrap();
        let poles = PoleSet::real(&[2.0]).unwrap();
        assert!(matches!(
            assemble_ls(&grid, &[c(1.0, 0.0)], &poles, false),
            Err(Error::Dimension(_))
        ));
    }
}
