//! Simulation of nabla (backward-difference) fractional-order systems with
//! nonzero initial instant and nonzero initial state.
//!
//! Two routes are provided and cross-checked:
//!
//! * [`nabla`]: exact evaluation of the defining sums, used as ground truth;
//! * [`vecfit`] + [`fdm`]: a finite rational approximation of `1/s^α`
//!   identified by iterative vector fitting, realized as a bank of
//!   first-order nabla modes.
//!
//! [`nlt`] evaluates and numerically inverts the nabla Laplace transform.
//!
//! ```
//! use nabla_fdm::fdm::simulate_operator;
//! use nabla_fdm::vecfit::{fit_operator, make_grid};
//! use nabla_fdm::{frac_sum, FitConfig, FracOrder, SignalTrace};
//!
//! let alpha = FracOrder::new(0.5)?;
//! let approx = fit_operator(alpha, &make_grid(1e-3, 1e3, 100)?, FitConfig::new(20, 8))?;
//! let u = SignalTrace::from_fn(5, 31, |k| if k > 5 { 1.0 } else { 0.0 })?;
//! let exact = frac_sum(&u, alpha)?;
//! let y = simulate_operator(&approx, &u)?;
//! assert!(exact.values().iter().zip(y.values()).all(|(e, y)| (e - y).abs() < 1e-3));
//! # Ok::<(), nabla_fdm::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expcli;
pub mod fdm;
pub mod linalg;
pub mod nabla;
pub mod nlt;
pub mod system;
pub mod trace;
pub mod vecfit;

pub use error::{Error, Result};
pub use nabla::{backward_diff, caputo_diff, exact_solve, frac_sum, gl_weights, FracOrder, WeightTable};
pub use system::{Dynamics, SystemSpec, Trajectory};
pub use trace::SignalTrace;
pub use vecfit::{FitConfig, RationalApproximant};
