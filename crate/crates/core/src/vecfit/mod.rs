//! Iterative vector fitting of the fractional sum operator `1/s^α`.

mod approximant;
mod fit;
mod grid;
mod ls;
mod poles;
mod relocate;

pub use approximant::{error_j, RationalApproximant};
pub use fit::{
    fit_operator, fit_operator_from, fit_samples, fit_with_integrator, identify_residues, integrator_form, FitConfig,
    RationalFit,
};
pub use grid::{make_grid, SamplingGrid};
pub use ls::{assemble_ls, fit_residues, solve_ls, AuxSolution, COINCIDENT_POLES};
pub use poles::{InitPoles, Pole, PoleSet};
pub use relocate::relocate_poles;

pub(crate) use approximant::fmt_f64;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nabla::FracOrder;

/// Principal-branch `1/s^α`, undefined on the non-positive real axis.
pub fn target_sum_op(alpha: FracOrder, s: Complex64) -> Result<Complex64> {
    if s.im == 0.0 && s.re <= 0.0 {
        return Err(Error::Domain(format!(
            "1/s^alpha is undefined on the branch cut, s = {s}"
        )));
    }
    Ok((-alpha.value() * s.ln()).exp())
}
