//! Frequency-distributed models: each approximant pole becomes a
//! first-order nabla mode `∇z = −ω z + v`, stepped exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nabla::{backward_diff, FracOrder};
use crate::system::{check_input, SystemSpec, Trajectory};
use crate::trace::SignalTrace;
use crate::vecfit::RationalApproximant;

/// Imaginary residue tolerated when conjugate modes are recombined.
pub const REALNESS_TOLERANCE: f64 = 1e-12;

/// `μ_α(ω) = sin(απ) / (ω^α π)`.
pub fn weight_mu(alpha: FracOrder, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("weight needs omega > 0, got {omega}")));
    }
    let a = alpha.value();
    Ok((a * std::f64::consts::PI).sin() / (omega.powf(a) * std::f64::consts::PI))
}

/// Mode values `z_j(ω_i, k)`, one row per pseudo-state dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FdmState {
    k: i64,
    z: Vec<Vec<Complex64>>,
}

impl FdmState {
    /// All modes at rest at instant `a`.
    pub fn zeros(a: i64, approxs: &[RationalApproximant]) -> Self {
        FdmState {
            k: a,
            z: approxs
                .iter()
                .map(|ap| vec![Complex64::new(0.0, 0.0); ap.poles().len()])
                .collect(),
        }
    }

    pub fn instant(&self) -> i64 {
        self.k
    }

    pub fn dims(&self) -> usize {
        self.z.len()
    }

    pub fn modes(&self, j: usize) -> &[Complex64] {
        &self.z[j]
    }

    /// `Σ_i c_i z_j(ω_i, k)` for dimension `j`.
    pub fn output(&self, j: usize, approx: &RationalApproximant) -> Result<f64> {
        let z = &self.z[j];
        if z.len() != approx.poles().len() {
            return Err(Error::Dimension(format!(
                "dimension {j} has {} modes, approximant has {} poles",
                z.len(),
                approx.poles().len()
            )));
        }
        let y: Complex64 = approx.residues().iter().zip(z).map(|(c, z)| c * z).sum();
        Ok(real(y))
    }
}

fn real(v: Complex64) -> f64 {
    debug_assert!(
        v.im.abs() <= REALNESS_TOLERANCE * v.re.abs().max(1.0),
        "conjugate modes lost realness: {v}"
    );
    v.re
}

/// Refuses poles the nabla step would amplify.
fn check_stepping(approx: &RationalApproximant) -> Result<()> {
    let skip = usize::from(approx.has_integrator());
    for w in &approx.poles()[skip..] {
        let modulus = (1.0 + w).norm();
        if !(modulus > 1.0) {
            return Err(Error::Instability { omega: *w, modulus });
        }
    }
    Ok(())
}

/// `z_i ← (z_i + v)/(1 + ω_i)`, the exact solution of `∇z = −ω z + v`.
fn advance(z: &mut [Complex64], poles: &[Complex64], v: f64) {
    for (zi, w) in z.iter_mut().zip(poles) {
        let prev = *zi;
        *zi = (prev + v) / (1.0 + w);
        debug_assert!(
            ((*zi - prev) - (-w * *zi + v)).norm() <= 1e-9 * (1.0 + zi.norm() * (1.0 + w.norm()) + v.abs()),
            "nabla step residual too large"
        );
    }
}

/// One step of a single-dimension state with input `u_k`; returns the new
/// state and `y_k = Σ c_i z_i(k) [+ d·u_k]`.
pub fn step_operator(state: &FdmState, approx: &RationalApproximant, u_k: f64) -> Result<(FdmState, f64)> {
    if state.dims() != 1 {
        return Err(Error::Dimension(format!(
            "step_operator drives one dimension, state has {}",
            state.dims()
        )));
    }
    check_stepping(approx)?;
    let mut next = state.clone();
    if next.z[0].len() != approx.poles().len() {
        return Err(Error::Dimension(format!(
            "state has {} modes, approximant has {} poles",
            next.z[0].len(),
            approx.poles().len()
        )));
    }
    advance(&mut next.z[0], approx.poles(), u_k);
    next.k += 1;
    let y = next.output(0, approx)? + approx.direct().unwrap_or(0.0) * u_k;
    Ok((next, y))
}

/// `ŷ ≈ frac_sum(u, α)` from rest: `ŷ(a) = 0`, then one step per sample.
pub fn simulate_operator(approx: &RationalApproximant, u: &SignalTrace) -> Result<SignalTrace> {
    check_stepping(approx)?;
    let d = approx.direct().unwrap_or(0.0);
    let poles = approx.poles();
    let mut z = vec![Complex64::new(0.0, 0.0); poles.len()];
    let mut out = Vec::with_capacity(u.len());
    out.push(0.0);
    for &uk in u.tail() {
        advance(&mut z, poles, uk);
        let y: Complex64 = approx.residues().iter().zip(&z).map(|(c, z)| c * z).sum();
        out.push(real(y) + d * uk);
    }
    SignalTrace::new(u.initial_instant(), out)
}

/// Puts all of `x_j(a)` on the integrator mode: `z_j(0, a) = x_j(a)/c_{j,0}`.
pub fn assign_initial_state(a: i64, x_a: &[f64], approxs: &[RationalApproximant]) -> Result<FdmState> {
    if x_a.len() != approxs.len() {
        return Err(Error::Dimension(format!(
            "x(a) has {} entries for {} approximants",
            x_a.len(),
            approxs.len()
        )));
    }
    let mut state = FdmState::zeros(a, approxs);
    for (j, (&x, ap)) in x_a.iter().zip(approxs).enumerate() {
        if x == 0.0 {
            continue;
        }
        let c0 = ap.integrator_residue().ok_or_else(|| {
            Error::Configuration(format!(
                "dimension {j} has x(a) = {x} but its approximant has no integrator pole; fit it with the integrator variant"
            ))
        })?;
        if c0 == 0.0 {
            return Err(Error::Division(format!("integrator residue of dimension {j} is zero")));
        }
        state.z[j][0] = Complex64::new(x / c0, 0.0);
    }
    Ok(state)
}

/// Simulates `∇^α x = f(x, u)` with each fractional sum replaced by its
/// approximant.
///
/// Writing `x_j(k) = P_j + G_j v_j(k)` with `P_j = Σ c z(k−1)/(1+ω)` and
/// `G_j = Σ c/(1+ω) [+ d]`, the current-sample equation is solved the same
/// way the exact solver solves its own.
pub fn simulate_system(
    sys: &SystemSpec,
    u: &SignalTrace,
    approxs: &[RationalApproximant],
    horizon: usize,
) -> Result<Trajectory> {
    sys.validate()?;
    check_input(u, sys.a, horizon)?;
    let n = sys.dim();
    if approxs.len() != n {
        return Err(Error::Dimension(format!(
            "{} approximants for a {n}-dimensional system",
            approxs.len()
        )));
    }
    for (j, (ap, alpha)) in approxs.iter().zip(&sys.orders).enumerate() {
        check_stepping(ap)?;
        if (ap.alpha() - alpha.value()).abs() > 1e-12 {
            return Err(Error::Configuration(format!(
                "approximant {j} was fitted for order {}, system order is {}",
                ap.alpha(),
                alpha.value()
            )));
        }
    }
    let mut state = assign_initial_state(sys.a, &sys.x_a, approxs)?;
    let gains: Vec<f64> = approxs
        .iter()
        .map(|ap| {
            let g: Complex64 = ap.residues().iter().zip(ap.poles()).map(|(c, w)| c / (1.0 + w)).sum();
            real(g) + ap.direct().unwrap_or(0.0)
        })
        .collect();

    let x0: Vec<f64> = (0..n).map(|j| state.output(j, &approxs[j])).collect::<Result<_>>()?;
    let mut ys = Vec::with_capacity(horizon + 1);
    ys.push(sys.output_at(&x0, u.values()[0]));
    let mut xs = Vec::with_capacity(horizon + 1);
    xs.push(x0);

    for m in 1..=horizon {
        let k = sys.a + m as i64;
        let uk = u.values()[m];
        let base: Vec<f64> = approxs
            .iter()
            .zip(&state.z)
            .map(|(ap, z)| {
                let p: Complex64 = ap
                    .residues()
                    .iter()
                    .zip(ap.poles())
                    .zip(z)
                    .map(|((c, w), z)| c * z / (1.0 + w))
                    .sum();
                real(p)
            })
            .collect();
        let (x, v) = sys.implicit_step(k, &base, &gains, &xs, uk)?;
        for (j, ap) in approxs.iter().enumerate() {
            advance(&mut state.z[j], ap.poles(), v[j]);
        }
        state.k = k;
        ys.push(sys.output_at(&x, uk));
        xs.push(x);
    }
    Trajectory::assemble(sys.a, xs, ys)
}

/// Approximate Caputo difference of a known signal: drives an order
/// `1−α` approximant from rest with `∇y`.
pub fn caputo_diff_fdm(y: &SignalTrace, alpha: FracOrder, approx_1ma: &RationalApproximant) -> Result<SignalTrace> {
    let inner = alpha.complement()?;
    if (approx_1ma.alpha() - inner.value()).abs() > 1e-12 {
        return Err(Error::Configuration(format!(
            "Caputo difference of order {} needs an approximant of order {}, got {}",
            alpha.value(),
            inner.value(),
            approx_1ma.alpha()
        )));
    }
    let d = backward_diff(y, 1)?;
    let drive = SignalTrace::from_tail(y.initial_instant(), 0.0, d.values());
    simulate_operator(approx_1ma, &drive)
}
