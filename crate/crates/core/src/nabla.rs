//! Definition-based nabla fractional calculus.
//!
//! Everything here evaluates the defining finite sums directly, with full
//! memory. These routines are the reference every approximation is checked
//! against.

use crate::error::{Error, Result};
use crate::system::{check_input, SystemSpec, Trajectory};
use crate::trace::SignalTrace;

/// A positive fractional order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    /// Accepts any finite `alpha > 0` (valid for sums).
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(format!("order must be positive, got {alpha}")));
        }
        Ok(FracOrder(alpha))
    }

    /// Accepts `0 < alpha < 1` (valid for Caputo differences).
    pub fn caputo(alpha: f64) -> Result<Self> {
        let order = Self::new(alpha)?;
        order.require_caputo()?;
        Ok(order)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - alpha`, the order of the sum inside the Caputo difference.
    pub fn complement(self) -> Result<Self> {
        self.require_caputo()?;
        Ok(FracOrder(1.0 - self.0))
    }

    pub(crate) fn require_caputo(self) -> Result<()> {
        if !(self.0 > 0.0 && self.0 < 1.0) {
            return Err(Error::Domain(format!(
                "Caputo order must lie in (0, 1), got {}",
                self.0
            )));
        }
        Ok(())
    }
}

/// Coefficients `w[i] = (-1)^i · binom(-alpha, i)` of the fractional sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub alpha: FracOrder,
    pub w: Vec<f64>,
}

/// `w[0..=m]` by the recursion `w[i] = w[i-1]·(alpha+i-1)/i`.
///
/// Equal to `Γ(alpha+i) / (Γ(alpha)·Γ(i+1))`, but without overflow.
pub fn gl_weights(alpha: FracOrder, m: usize) -> WeightTable {
    let a = alpha.value();
    let mut w = Vec::with_capacity(m + 1);
    w.push(1.0);
    for i in 1..=m {
        let prev = w[i - 1];
        w.push(prev * (a + i as f64 - 1.0) / i as f64);
    }
    WeightTable { alpha, w }
}

/// The `alpha`-th nabla fractional sum
/// `y(k) = Σ_{i=0}^{k-a-1} w[i] · f(k-i)`, `k = a+1, …`.
///
/// `y(a)` is the empty sum and is stored as 0. `f(a)` is never read.
pub fn frac_sum(f: &SignalTrace, alpha: FracOrder) -> Result<SignalTrace> {
    f.require_len(2)?;
    let tail = f.tail();
    let w = gl_weights(alpha, tail.len()).w;
    let mut y = Vec::with_capacity(f.len());
    y.push(0.0);
    for m in 1..=tail.len() {
        // f(a+m-i) lives at tail[m-1-i]
        let acc: f64 = (0..m).map(|i| w[i] * tail[m - 1 - i]).sum();
        y.push(acc);
    }
    SignalTrace::new(f.initial_instant(), y)
}

/// n-fold backward difference `∇f(k) = f(k) - f(k-1)`.
///
/// The result is anchored at `a+n`: earlier samples are not defined.
pub fn backward_diff(f: &SignalTrace, n: usize) -> Result<SignalTrace> {
    if n == 0 {
        return Err(Error::Domain("difference order must be at least 1".into()));
    }
    f.require_len(n + 1)?;
    let mut v = f.values().to_vec();
    for _ in 0..n {
        v = v.windows(2).map(|p| p[1] - p[0]).collect();
    }
    SignalTrace::new(f.initial_instant() + n as i64, v)
}

/// Caputo fractional difference `∇^{alpha-1} ∇ f` for `0 < alpha < 1`.
///
/// Reads `f(a)`. The value at `a` is stored as 0.
pub fn caputo_diff(f: &SignalTrace, alpha: FracOrder) -> Result<SignalTrace> {
    let inner = alpha.complement()?;
    let d = backward_diff(f, 1)?;
    let shifted = SignalTrace::from_tail(f.initial_instant(), 0.0, d.values());
    frac_sum(&shifted, inner)
}

/// Steps the system exactly by its definition for `k = a+1 … a+horizon`.
///
/// At each instant the Caputo difference splits as
/// `x(k) - x(k-1) + Σ_{i≥1} w[i]·∇x(k-i)`; the current-sample equation is
/// then solved in closed form (explicit or affine dynamics only).
pub fn exact_solve(sys: &SystemSpec, u: &SignalTrace, horizon: usize) -> Result<Trajectory> {
    sys.validate()?;
    check_input(u, sys.a, horizon)?;
    let n = sys.dim();
    let weights: Vec<Vec<f64>> = sys
        .orders
        .iter()
        .map(|alpha| Ok(gl_weights(alpha.complement()?, horizon).w))
        .collect::<Result<_>>()?;

    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(horizon + 1);
    let mut ys = Vec::with_capacity(horizon + 1);
    xs.push(sys.x_a.clone());
    ys.push(sys.output_at(&sys.x_a, u.values()[0]));
    // diffs[j][m-1] = ∇x_j(a+m)
    let mut diffs: Vec<Vec<f64>> = vec![Vec::with_capacity(horizon); n];
    let ones = vec![1.0; n];

    for m in 1..=horizon {
        let k = sys.a + m as i64;
        let uk = u.values()[m];
        let prev = &xs[m - 1];
        let base: Vec<f64> = (0..n)
            .map(|j| {
                let w = &weights[j];
                let d = &diffs[j];
                let memory: f64 = (1..m).map(|i| w[i] * d[m - 1 - i]).sum();
                prev[j] - memory
            })
            .collect();
        let (x, _) = sys.implicit_step(k, &base, &ones, &xs, uk)?;
        for j in 0..n {
            diffs[j].push(x[j] - prev[j]);
        }
        ys.push(sys.output_at(&x, uk));
        xs.push(x);
    }
    Trajectory::assemble(sys.a, xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Dynamics;
    use std::sync::Arc;

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn step(a: i64, n: usize) -> SignalTrace {
        SignalTrace::from_tail(a, 0.0, &vec![1.0; n])
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn weights_alpha_one_are_all_one() {
        assert_eq!(gl_weights(order(1.0), 3).w, vec![1.0; 4]);
    }

    #[test]
    fn weights_half() {
        close(&gl_weights(order(0.5), 3).w, &[1.0, 0.5, 0.375, 0.3125], 1e-15);
        close(&gl_weights(order(0.3), 1).w, &[1.0, 0.3], 1e-15);
    }

    #[test]
    fn weights_match_gamma_ratio() {
        use statrs::function::gamma::ln_gamma;
        for tenth in 1..=9 {
            let a = tenth as f64 / 10.0;
            let w = gl_weights(order(a), 200).w;
            for (i, wi) in w.iter().enumerate() {
                let i = i as f64;
                let g = (ln_gamma(a + i) - ln_gamma(a) - ln_gamma(i + 1.0)).exp();
                assert!((wi - g).abs() <= 1e-12 * g, "alpha={a} i={i}");
                assert!(*wi > 0.0);
            }
        }
    }

    #[test]
    fn nonpositive_order_rejected() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(-0.5).is_err());
        assert!(FracOrder::caputo(1.0).is_err());
    }

    #[test]
    fn sum_of_step() {
        let y = frac_sum(&step(5, 3), order(0.5)).unwrap();
        close(y.values(), &[0.0, 1.0, 1.5, 1.875], 1e-15);
        assert_eq!(y.initial_instant(), 5);
    }

    #[test]
    fn sum_order_one_is_cumulative() {
        let f = SignalTrace::new(2, vec![9.0, 1.0, -2.0, 3.5, 0.25]).unwrap();
        let y = frac_sum(&f, order(1.0)).unwrap();
        close(y.values(), &[0.0, 1.0, -1.0, 2.5, 2.75], 1e-15);
    }

    #[test]
    fn sum_of_impulse_is_weight_table() {
        let mut tail = vec![0.0; 6];
        tail[0] = 1.0;
        let y = frac_sum(&SignalTrace::from_tail(0, 0.0, &tail), order(0.5)).unwrap();
        let w = gl_weights(order(0.5), 5).w;
        close(&y.values()[1..], &w[..6], 1e-15);
    }

    #[test]
    fn sum_needs_a_sample_after_a() {
        let f = SignalTrace::new(0, vec![1.0]).unwrap();
        assert!(matches!(frac_sum(&f, order(0.5)), Err(Error::Length { .. })));
    }

    #[test]
    fn differences() {
        let lin = SignalTrace::from_fn(3, 6, |k| (k - 3) as f64).unwrap();
        let d = backward_diff(&lin, 1).unwrap();
        assert_eq!(d.initial_instant(), 4);
        assert!(d.values().iter().all(|&v| v == 1.0));
        assert!(d.at(3).is_err());

        let c = SignalTrace::new(0, vec![2.0; 4]).unwrap();
        assert!(backward_diff(&c, 1).unwrap().values().iter().all(|&v| v == 0.0));

        let sq = SignalTrace::from_fn(0, 6, |k| (k * k) as f64).unwrap();
        let d2 = backward_diff(&sq, 2).unwrap();
        assert_eq!(d2.initial_instant(), 2);
        assert!(d2.values().iter().all(|&v| v == 2.0));

        assert!(matches!(backward_diff(&c, 4), Err(Error::Length { .. })));
    }

    #[test]
    fn caputo_of_constant_is_zero() {
        let c = SignalTrace::new(-2, vec![3.7; 12]).unwrap();
        let d = caputo_diff(&c, order(0.4)).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn caputo_of_ramp() {
        let ramp = SignalTrace::from_fn(5, 4, |k| (k - 5) as f64).unwrap();
        let d = caputo_diff(&ramp, order(0.5)).unwrap();
        close(&d.values()[1..], &[1.0, 1.5, 1.875], 1e-15);
    }

    #[test]
    fn caputo_inverts_sum() {
        let g = SignalTrace::from_fn(1, 30, |k| (0.7 * k as f64).sin() + 0.1 * k as f64).unwrap();
        let y = frac_sum(&g, order(0.35)).unwrap();
        let back = caputo_diff(&y, order(0.35)).unwrap();
        close(back.tail(), g.tail(), 1e-10);
    }

    #[test]
    fn caputo_rejects_order_outside_unit_interval() {
        let c = SignalTrace::new(0, vec![1.0; 4]).unwrap();
        assert!(caputo_diff(&c, order(1.5)).is_err());
    }

    #[test]
    fn exact_operator_case_equals_sum() {
        let alpha = order(0.5);
        let u = SignalTrace::from_fn(5, 31, |k| if k <= 5 { 0.0 } else { (k as f64).cos() }).unwrap();
        let sys = SystemSpec::integrator(alpha, 5, 0.0);
        let traj = exact_solve(&sys, &u, 30).unwrap();
        let y = frac_sum(&u, alpha).unwrap();
        close(traj.output(0).values(), y.values(), 1e-12);
    }

    #[test]
    fn exact_linear_residual() {
        let alpha = order(0.5);
        let a = 5;
        let u = SignalTrace::from_fn(a, 61, |k| 5.0 * (0.2 * std::f64::consts::PI * k as f64).sin()).unwrap();
        let sys = SystemSpec::linear_scalar(alpha, a, 1.0, 2.0);
        let traj = exact_solve(&sys, &u, 60).unwrap();
        let x = traj.state(0);
        assert_eq!(x.values()[0], 1.0);
        let lhs = caputo_diff(x, alpha).unwrap();
        for m in 1..=60 {
            let rhs = -2.0 * x.values()[m] + u.values()[m];
            assert!((lhs.values()[m] - rhs).abs() <= 1e-12, "k={}", a + m as i64);
        }
    }

    #[test]
    fn exact_nonlinear_residual() {
        let alpha = order(0.5);
        let a = 5;
        let u = SignalTrace::from_fn(a, 51, |k| 5.0 * ((k - a - 1).rem_euclid(5)) as f64 / 5.0).unwrap();
        let sys = SystemSpec {
            a,
            orders: vec![alpha],
            x_a: vec![1.0],
            dynamics: Dynamics::Affine {
                gain: nalgebra::DMatrix::from_element(1, 1, -0.3),
                rest: Arc::new(|_, past: &[Vec<f64>], u| {
                    let prev = past.last().unwrap()[0];
                    vec![0.5 * prev.cos().powi(2) + u]
                }),
            },
            output: None,
        };
        let traj = exact_solve(&sys, &u, 50).unwrap();
        let x = traj.state(0).values();
        let lhs = caputo_diff(traj.state(0), alpha).unwrap();
        for m in 1..=50 {
            let rhs = -0.3 * x[m] + 0.5 * x[m - 1].cos().powi(2) + u.values()[m];
            assert!((lhs.values()[m] - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_two_dimensional_coupled() {
        let a = 0;
        let gain = nalgebra::DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.25, -2.0]);
        let sys = SystemSpec {
            a,
            orders: vec![order(0.3), order(0.8)],
            x_a: vec![1.0, -1.0],
            dynamics: Dynamics::Affine {
                gain: gain.clone(),
                rest: Arc::new(|_, _, u| vec![u, 0.0]),
            },
            output: Some(Arc::new(|x, _| vec![x[0] + x[1]])),
        };
        let u = SignalTrace::from_fn(a, 41, |k| (k as f64 * 0.3).sin()).unwrap();
        let traj = exact_solve(&sys, &u, 40).unwrap();
        let d0 = caputo_diff(traj.state(0), order(0.3)).unwrap();
        let d1 = caputo_diff(traj.state(1), order(0.8)).unwrap();
        for m in 1..=40 {
            let x0 = traj.state(0).values()[m];
            let x1 = traj.state(1).values()[m];
            assert!((d0.values()[m] - (-x0 + 0.5 * x1 + u.values()[m])).abs() <= 1e-12);
            assert!((d1.values()[m] - (-0.25 * x0 - 2.0 * x1)).abs() <= 1e-12);
            assert!((traj.output(0).values()[m] - (x0 + x1)).abs() <= 1e-15);
        }
    }

    #[test]
    fn exact_refuses_implicit_nonlinearity() {
        let sys = SystemSpec {
            a: 0,
            orders: vec![order(0.5)],
            x_a: vec![0.0],
            dynamics: Dynamics::Implicit(Arc::new(|x, _, u| vec![x[0].sin() + u])),
            output: None,
        };
        let u = SignalTrace::zeros(0, 5).unwrap();
        assert!(matches!(exact_solve(&sys, &u, 4), Err(Error::UnsupportedStructure(_))));
    }

    #[test]
    fn exact_reports_singular_step() {
        // (1 - gain) x = … with gain = 1 is singular
        let sys = SystemSpec::linear_scalar(order(0.5), 0, 0.0, -1.0);
        let u = SignalTrace::zeros(0, 5).unwrap();
        assert!(matches!(exact_solve(&sys, &u, 4), Err(Error::StepSingularity { k: 1 })));
    }

    #[test]
    fn exact_rejects_short_input() {
        let sys = SystemSpec::integrator(order(0.5), 0, 0.0);
        let u = SignalTrace::zeros(0, 5).unwrap();
        assert!(matches!(exact_solve(&sys, &u, 5), Err(Error::Length { .. })));
    }
}
