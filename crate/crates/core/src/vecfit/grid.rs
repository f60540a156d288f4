use num_complex::Complex64;

use crate::error::{Error, Result};

/// Frequencies `ζ_l > 0` at which the target is sampled, `s_l = j·ζ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingGrid {
    zeta: Vec<f64>,
}

/// `count` logarithmically spaced frequencies spanning `[omega_l, omega_h]`
/// inclusive.
pub fn make_grid(omega_l: f64, omega_h: f64, count: usize) -> Result<SamplingGrid> {
    if !(omega_l > 0.0 && omega_l < omega_h && omega_h.is_finite()) {
        return Err(Error::Domain(format!(
            "frequency bounds must satisfy 0 < omega_l < omega_h, got [{omega_l}, {omega_h}]"
        )));
    }
    if count < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 points, got {count}")));
    }
    let (lo, hi) = (omega_l.log10(), omega_h.log10());
    let last = count - 1;
    let zeta = (0..count)
        .map(|l| match l {
            0 => omega_l,
            l if l == last => omega_h,
            l => 10f64.powf(lo + (hi - lo) * l as f64 / last as f64),
        })
        .collect();
    Ok(SamplingGrid { zeta })
}

impl SamplingGrid {
    /// Arbitrary positive, strictly increasing frequencies.
    pub fn from_frequencies(zeta: Vec<f64>) -> Result<Self> {
        if zeta.len() < 2 {
            return Err(Error::Domain("grid needs at least 2 points".into()));
        }
        if !(zeta[0] > 0.0) || zeta.windows(2).any(|w| !(w[1] > w[0])) || !zeta[zeta.len() - 1].is_finite() {
            return Err(Error::Domain(
                "grid frequencies must be positive and strictly increasing".into(),
            ));
        }
        Ok(SamplingGrid { zeta })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.zeta
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.zeta[0]
    }

    pub fn upper(&self) -> f64 {
        self.zeta[self.zeta.len() - 1]
    }

    /// The sample points `s_l = j·ζ_l`.
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.zeta.iter().map(|&z| Complex64::new(0.0, z))
    }

    /// Evaluates `f` at every sample point.
    pub fn sample(&self, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
        self.points().map(f).collect()
    }

    /// Identification needs more real equations than unknowns: `L > 2N+2`.
    pub fn check_capacity(&self, n: usize) -> Result<()> {
        if self.len() <= 2 * n + 2 {
            return Err(Error::Configuration(format!(
                "L > 2N+2 violated: {} samples for N = {n}",
                self.len()
            )));
        }
        Ok(())
    }
}
