//! Nabla Laplace transform `F(s) = Σ_{k≥1} (1-s)^{k-1} f(a+k)` and its
//! numerical inversion.
//!
//! The inverse is the contour integral around `s = 1` on the circle
//! `s = 1 - r·e^{-jθ}`, which turns into a Fourier coefficient of the
//! periodic integrand and is evaluated with the trapezoidal rule.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::trace::SignalTrace;

/// Whether samples past the end of a trace are zero or merely unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// The signal is zero after the last sample; the finite sum is exact.
    Finite,
    /// The trace is a prefix of a longer signal.
    Truncated,
}

/// `Σ_{k=1}^{M} (1-s)^{k-1} f(a+k)` over the available samples.
pub fn nlt_eval(f: &SignalTrace, s: Complex64, support: Support) -> Result<Complex64> {
    let q = Complex64::new(1.0, 0.0) - s;
    if support == Support::Truncated && q.norm() >= 1.0 {
        return Err(Error::Divergent {
            s,
            modulus: q.norm(),
            radius: 1.0,
        });
    }
    Ok(f.tail()
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &v| acc * q + v))
}

/// A transform `s ↦ F(s)` valid on the disc `|1 - s| < radius`.
#[derive(Clone)]
pub struct TransformFn {
    radius: f64,
    eval: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for TransformFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformFn")
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

impl TransformFn {
    pub fn new(radius: f64, eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("validity radius must be positive, got {radius}")));
        }
        Ok(TransformFn {
            radius,
            eval: Arc::new(eval),
        })
    }

    /// Transform of a finitely supported trace; valid everywhere.
    pub fn of_trace(f: &SignalTrace) -> Self {
        let f = f.clone();
        TransformFn {
            radius: f64::INFINITY,
            eval: Arc::new(move |s| nlt_eval(&f, s, Support::Finite).expect("finite support never diverges")),
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let modulus = (Complex64::new(1.0, 0.0) - s).norm();
        if !(modulus < self.radius) {
            return Err(Error::Divergent {
                s,
                modulus,
                radius: self.radius,
            });
        }
        Ok((self.eval)(s))
    }
}

/// Circle `s = 1 - r·e^{-jθ}` sampled at `nodes` equispaced angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            radius: 0.5,
            nodes: 256,
        }
    }
}

impl ContourSpec {
    pub fn new(radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("contour radius must be positive, got {radius}")));
        }
        if nodes < 4 {
            return Err(Error::Domain(format!("need at least 4 quadrature nodes, got {nodes}")));
        }
        Ok(ContourSpec { radius, nodes })
    }
}

/// Imaginary parts above this (relative to `max(1, |f|)`) flag an
/// inaccurate inversion.
pub const IMAG_TOLERANCE: f64 = 1e-8;

/// One recovered sample with its quadrature diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSample {
    pub k: i64,
    pub value: f64,
    /// Imaginary part left over by the quadrature; zero in exact arithmetic.
    pub imag_residue: f64,
    pub radius: f64,
}

impl InverseSample {
    pub fn is_accurate(&self) -> bool {
        self.imag_residue.abs() <= IMAG_TOLERANCE * self.value.abs().max(1.0)
    }

    pub fn warning(&self) -> Option<String> {
        (!self.is_accurate()).then(|| {
            format!(
                "k = {}: imaginary residue {:e} exceeds quadrature tolerance; try another radius",
                self.k, self.imag_residue
            )
        })
    }
}

/// `f(k)` from `F(s)` by the trapezoidal rule on the contour:
///
/// `f(k) = (1/2π) ∫_{-π}^{π} F(1 - r e^{-jθ}) · r^{a-k+1} e^{-jθ(a-k+1)} dθ`.
pub fn inlt_contour(transform: &TransformFn, k: i64, a: i64, contour: &ContourSpec) -> Result<InverseSample> {
    if k <= a {
        return Err(Error::Domain(format!(
            "instant {k} is not after the initial instant {a}"
        )));
    }
    let r = contour.radius;
    if !(r < transform.radius()) {
        return Err(Error::Domain(format!(
            "contour radius {r} reaches outside the validity radius {}",
            transform.radius()
        )));
    }
    let q = contour.nodes;
    let e = a - k + 1;
    let scale = r.powi(e as i32);
    let step = 2.0 * PI / q as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..q {
        let theta = -PI + step * (i + 1) as f64;
        let rot = Complex64::from_polar(1.0, -theta);
        let s = Complex64::new(1.0, 0.0) - rot * r;
        let kernel = Complex64::from_polar(1.0, -theta * e as f64);
        acc += transform.eval(s)? * kernel;
    }
    let f = acc * (scale / q as f64);
    Ok(InverseSample {
        k,
        value: f.re,
        imag_residue: f.im,
        radius: r,
    })
}

/// Tabulates [`inlt_contour`] over `a+1 ..= a+count`.
pub fn inlt_range(transform: &TransformFn, a: i64, count: usize, contour: &ContourSpec) -> Result<Vec<InverseSample>> {
    (1..=count as i64)
        .map(|m| inlt_contour(transform, a + m, a, contour))
        .collect()
}

/// `f(a+κ)` as the limit `s → 1` of
/// `[F(s) - Σ_{k=1}^{κ-1} (1-s)^{k-1} f(a+k)] / (1-s)^{κ-1}`.
///
/// Evaluated at `s = 1 - 10^{-m}`, `m = 2..=6`, then Richardson-extrapolated.
/// The estimate with the smallest successive change wins. Meant for small κ.
pub fn inlt_limit(transform: &TransformFn, kappa: usize, known_prefix: &[f64]) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::Domain("kappa must be at least 1".into()));
    }
    if known_prefix.len() != kappa - 1 {
        return Err(Error::Length {
            needed: kappa - 1,
            available: known_prefix.len(),
        });
    }
    let hs: Vec<f64> = (2..=6).map(|m| 10f64.powi(-m)).collect();
    // table[i][0] = g(h_i); noise[i] bounds the cancellation error in it
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(hs.len());
    let mut noise = Vec::with_capacity(hs.len());
    for &h in &hs {
        let s = Complex64::new(1.0 - h, 0.0);
        let head: f64 = known_prefix.iter().enumerate().map(|(i, v)| h.powi(i as i32) * v).sum();
        let value = transform.eval(s)?.re;
        let denom = h.powi(kappa as i32 - 1);
        table.push(vec![(value - head) / denom]);
        noise.push(4.0 * f64::EPSILON * value.abs().max(head.abs()) / denom);
    }
    let mut best = (f64::INFINITY, f64::INFINITY, table[0][0]);
    for i in 1..table.len() {
        for j in 1..=i {
            let prev = table[i][j - 1];
            let up = table[i - 1][j - 1];
            let next = prev + (prev - up) / (10f64.powi(j as i32) - 1.0);
            table[i].push(next);
            let change = (next - prev).abs();
            let score = change + 2.0 * noise[i];
            if score < best.0 {
                best = (score, change, next);
            }
        }
    }
    let (_, change, value) = best;
    if !value.is_finite() || change > 1e-4 * value.abs().max(1.0) {
        return Err(Error::NumericalLimit(format!(
            "extrapolated estimates keep changing by {change:e}"
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reciprocal() -> TransformFn {
        TransformFn::new(1.0, |s| 1.0 / s).unwrap()
    }

    #[test]
    fn impulse_transform_is_one() {
        let f = SignalTrace::from_tail(3, 7.0, &[1.0, 0.0, 0.0]);
        for s in [c(0.3, 0.1), c(2.0, -4.0), c(-1.0, 0.0)] {
            let v = nlt_eval(&f, s, Support::Finite).unwrap();
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn step_transform_tends_to_reciprocal() {
        let f = SignalTrace::from_tail(0, 0.0, &vec![1.0; 400]);
        let s = c(0.6, 0.2);
        let q = (1.0 - s).norm();
        let v = nlt_eval(&f, s, Support::Truncated).unwrap();
        // geometric tail bound |q|^M / |s|
        let bound = q.powi(400) / s.norm() + 1e-14;
        assert!((v - 1.0 / s).norm() <= bound);
    }

    #[test]
    fn geometric_transform() {
        let lambda: f64 = 0.3;
        let f = SignalTrace::from_fn(0, 300, |k| if k == 0 { 0.0 } else { (1.0 - lambda).powi(k as i32 - 1) }).unwrap();
        let s = c(0.8, -0.4);
        let v = nlt_eval(&f, s, Support::Truncated).unwrap();
        let exact = 1.0 / (s + lambda - lambda * s);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn truncated_series_outside_unit_disc_diverges() {
        let f = SignalTrace::from_tail(0, 0.0, &[1.0, 1.0]);
        assert!(matches!(
            nlt_eval(&f, c(-0.5, 0.0), Support::Truncated),
            Err(Error::Divergent { .. })
        ));
        assert!(nlt_eval(&f, c(-0.5, 0.0), Support::Finite).is_ok());
    }

    #[test]
    fn invert_reciprocal_gives_step() {
        let spec = ContourSpec::new(0.5, 256).unwrap();
        for a in [-3, 0, 5] {
            for m in 1..=12 {
                let r = inlt_contour(&reciprocal(), a + m, a, &spec).unwrap();
                assert!((r.value - 1.0).abs() <= 1e-10, "k={} {}", a + m, r.value);
                assert!(r.is_accurate());
            }
        }
    }

    #[test]
    fn invert_constant_gives_impulse() {
        let one = TransformFn::new(f64::INFINITY, |_| c(1.0, 0.0)).unwrap();
        let spec = ContourSpec::default();
        let first = inlt_contour(&one, 8, 7, &spec).unwrap();
        assert!((first.value - 1.0).abs() < 1e-14);
        for k in 9..20 {
            assert!(inlt_contour(&one, k, 7, &spec).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_random_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tail: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = SignalTrace::from_tail(4, 0.0, &tail);
        let tf = TransformFn::of_trace(&f);
        let got = inlt_range(&tf, 4, 20, &ContourSpec::default()).unwrap();
        for (g, want) in got.iter().zip(&tail) {
            assert!((g.value - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn trapezoid_converges_geometrically() {
        // f(a+k) = (1-λ)^{k-1}: aliasing error decays like (r(1-λ))^Q
        let lambda: f64 = 0.2;
        let tf = TransformFn::new(1.0 / (1.0 - lambda), move |s| 1.0 / (s + lambda - lambda * s)).unwrap();
        let exact: f64 = (1.0 - lambda).powi(2);
        let err = |q| {
            let r = inlt_contour(&tf, 3, 0, &ContourSpec::new(0.9, q).unwrap()).unwrap();
            (r.value - exact).abs()
        };
        let (e8, e16, e32) = (err(8), err(16), err(32));
        assert!(e8 / e16 > 10.0, "{e8} {e16}");
        assert!(e16 / e32 > 10.0, "{e16} {e32}");
    }

    #[test]
    fn contour_must_lie_inside_validity_region() {
        let spec = ContourSpec::new(1.2, 64).unwrap();
        assert!(matches!(
            inlt_contour(&reciprocal(), 1, 0, &spec),
            Err(Error::Domain(_))
        ));
        assert!(ContourSpec::new(0.5, 3).is_err());
        assert!(ContourSpec::new(0.0, 16).is_err());
        assert!(inlt_contour(&reciprocal(), 0, 0, &ContourSpec::default()).is_err());
    }

    #[test]
    fn evaluation_outside_region_is_error() {
        assert!(reciprocal().eval(c(-0.5, 0.0)).is_err());
        assert!(reciprocal().eval(c(0.5, 0.0)).is_ok());
    }

    #[test]
    fn limit_extraction() {
        assert!((inlt_limit(&reciprocal(), 1, &[]).unwrap() - 1.0).abs() < 1e-9);
        let one = TransformFn::new(f64::INFINITY, |_| c(1.0, 0.0)).unwrap();
        assert!((inlt_limit(&one, 1, &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!((inlt_limit(&reciprocal(), 2, &[1.0]).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn limit_agrees_with_contour() {
        // f(a+k) = k  has transform 1/s²
        let ramp = TransformFn::new(1.0, |s| 1.0 / (s * s)).unwrap();
        let lambda = 0.4;
        let geo = TransformFn::new(1.0 / (1.0 - lambda), move |s| 1.0 / (s + lambda - lambda * s)).unwrap();
        for tf in [reciprocal(), ramp, geo] {
            let spec = ContourSpec::default();
            let mut prefix = Vec::new();
            for kappa in 1..=3 {
                let by_contour = inlt_contour(&tf, kappa as i64, 0, &spec).unwrap().value;
                let by_limit = inlt_limit(&tf, kappa, &prefix).unwrap();
                assert!(
                    (by_contour - by_limit).abs() <= 1e-6,
                    "kappa={kappa} {by_contour} {by_limit}"
                );
                prefix.push(by_contour);
            }
        }
    }

    #[test]
    fn limit_reports_divergence() {
        // a wrong prefix leaves a double pole at s = 1
        let tf = TransformFn::new(1.0, |s| 1.0 / s).unwrap();
        assert!(matches!(
            inlt_limit(&tf, 3, &[5.0, -2.0]),
            Err(Error::NumericalLimit(_))
        ));
    }
}
