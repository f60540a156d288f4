//! Description of a nabla Caputo fractional-order system
//!
//! ```text
//! ∇^α x(k) = f(x(k), past, u(k)),   y(k) = g(x(k), u(k)),   x(a) given
//! ```
//!
//! The dynamics carry their dependence on the current sample `x(k)` in the
//! type: either none, affine, or general. Only the first two can be stepped.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::nabla::FracOrder;
use crate::trace::SignalTrace;

/// `(k, past, u(k)) -> ℝⁿ`, where `past[m] = x(a+m)` for every `a+m < k`.
pub type HistoryFn = Arc<dyn Fn(i64, &[Vec<f64>], f64) -> Vec<f64> + Send + Sync>;
/// `(x(k), past, u(k)) -> ℝⁿ` with arbitrary dependence on `x(k)`.
pub type ImplicitFn = Arc<dyn Fn(&[f64], &[Vec<f64>], f64) -> Vec<f64> + Send + Sync>;
/// `(x(k), u(k)) -> ℝ^q`.
pub type OutputFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Dynamics {
    /// `f` reads only strictly past samples and the input.
    Explicit(HistoryFn),
    /// `f = gain · x(k) + rest(k, past, u)`.
    Affine { gain: DMatrix<f64>, rest: HistoryFn },
    /// Arbitrary dependence on `x(k)`. Refused by both solvers.
    Implicit(ImplicitFn),
}

impl fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dynamics::Explicit(_) => f.write_str("Explicit(..)"),
            Dynamics::Affine { gain, .. } => f.debug_struct("Affine").field("gain", gain).finish(),
            Dynamics::Implicit(_) => f.write_str("Implicit(..)"),
        }
    }
}

#[derive(Clone)]
pub struct SystemSpec {
    pub a: i64,
    pub orders: Vec<FracOrder>,
    pub x_a: Vec<f64>,
    pub dynamics: Dynamics,
    /// `None` means `y = x`.
    pub output: Option<OutputFn>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("a", &self.a)
            .field("orders", &self.orders)
            .field("x_a", &self.x_a)
            .field("dynamics", &self.dynamics)
            .finish_non_exhaustive()
    }
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        self.orders.len()
    }

    /// `∇^α x(k) = -lambda·x(k) + u(k)`.
    pub fn linear_scalar(alpha: FracOrder, a: i64, x_a: f64, lambda: f64) -> Self {
        SystemSpec {
            a,
            orders: vec![alpha],
            x_a: vec![x_a],
            dynamics: Dynamics::Affine {
                gain: DMatrix::from_element(1, 1, -lambda),
                rest: Arc::new(|_, _, u| vec![u]),
            },
            output: None,
        }
    }

    /// `∇^α x(k) = u(k)`.
    pub fn integrator(alpha: FracOrder, a: i64, x_a: f64) -> Self {
        SystemSpec {
            a,
            orders: vec![alpha],
            x_a: vec![x_a],
            dynamics: Dynamics::Explicit(Arc::new(|_, _, u| vec![u])),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::Dimension("system has no pseudo-state".into()));
        }
        if self.x_a.len() != n {
            return Err(Error::Dimension(format!(
                "x(a) has {} entries, system has {n} orders",
                self.x_a.len()
            )));
        }
        for alpha in &self.orders {
            alpha.require_caputo()?;
        }
        match &self.dynamics {
            Dynamics::Affine { gain, .. } if gain.shape() != (n, n) => Err(Error::Dimension(format!(
                "affine gain is {}x{}, expected {n}x{n}",
                gain.nrows(),
                gain.ncols()
            ))),
            Dynamics::Implicit(_) => Err(Error::UnsupportedStructure(
                "dynamics depend non-affinely on the current sample x(k)".into(),
            )),
            _ => Ok(()),
        }
    }

    pub(crate) fn output_at(&self, x: &[f64], u: f64) -> Vec<f64> {
        match &self.output {
            Some(g) => g(x, u),
            None => x.to_vec(),
        }
    }

    /// Solves one step of the form `x = base + diag(lead) · f(x, past, u)`.
    ///
    /// Both steppers reduce to this: the exact solver has `lead = 1`, the
    /// frequency distributed model has `lead_j = Σ c_i / (1 + ω_i)`.
    /// Returns `(x(k), f(x(k), past, u(k)))`.
    pub(crate) fn implicit_step(
        &self,
        k: i64,
        base: &[f64],
        lead: &[f64],
        past: &[Vec<f64>],
        u: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        match &self.dynamics {
            Dynamics::Explicit(rest) => {
                let v = checked_len(rest(k, past, u), n)?;
                let x = (0..n).map(|j| base[j] + lead[j] * v[j]).collect();
                Ok((x, v))
            }
            Dynamics::Affine { gain, rest } => {
                let h = checked_len(rest(k, past, u), n)?;
                // (I - diag(lead)·A) x = base + lead ⊙ h
                let mut m = DMatrix::<f64>::identity(n, n);
                for j in 0..n {
                    for i in 0..n {
                        m[(j, i)] -= lead[j] * gain[(j, i)];
                    }
                }
                let rhs = DVector::from_iterator(n, (0..n).map(|j| base[j] + lead[j] * h[j]));
                let x = m
                    .lu()
                    .solve(&rhs)
                    .filter(|x| x.iter().all(|v| v.is_finite()))
                    .ok_or(Error::StepSingularity { k })?;
                let gx = gain * &x;
                let v = (0..n).map(|j| gx[j] + h[j]).collect();
                Ok((x.iter().copied().collect(), v))
            }
            Dynamics::Implicit(_) => Err(Error::UnsupportedStructure(
                "dynamics depend non-affinely on the current sample x(k)".into(),
            )),
        }
    }
}

fn checked_len(v: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(Error::Dimension(format!(
            "dynamics returned {} entries, expected {n}",
            v.len()
        )));
    }
    Ok(v)
}

/// Pseudo-state and output trajectories on `a..=a+horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<SignalTrace>,
    pub outputs: Vec<SignalTrace>,
}

impl Trajectory {
    pub(crate) fn assemble(a: i64, xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Trajectory {
            states: transpose(a, &xs)?,
            outputs: transpose(a, &ys)?,
        })
    }

    pub fn state(&self, j: usize) -> &SignalTrace {
        &self.states[j]
    }

    pub fn output(&self, j: usize) -> &SignalTrace {
        &self.outputs[j]
    }
}

fn transpose(a: i64, rows: &[Vec<f64>]) -> Result<Vec<SignalTrace>> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|j| SignalTrace::new(a, rows.iter().map(|r| r[j]).collect()))
        .collect()
}

/// Checks `u` is anchored at `a` and covers `a+horizon`.
pub(crate) fn check_input(u: &SignalTrace, a: i64, horizon: usize) -> Result<()> {
    if u.initial_instant() != a {
        return Err(Error::Dimension(format!(
            "input anchored at {}, system at {a}",
            u.initial_instant()
        )));
    }
    u.require_len(horizon + 1)
}
