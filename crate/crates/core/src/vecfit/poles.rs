use num_complex::Complex64;

use crate::error::{Error, Result};

/// One entry of a [`PoleSet`]. Values are the positive quantities `p`;
/// the actual pole sits at `-p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    Real(f64),
    /// `p` with `Im(p) > 0`; the set also contains `conj(p)` right after it.
    Pair(Complex64),
}

impl Pole {
    /// Number of scalar poles (and realified unknowns) this entry stands for.
    pub fn width(&self) -> usize {
        match self {
            Pole::Real(_) => 1,
            Pole::Pair(_) => 2,
        }
    }
}

/// How the first pole set of an iteration is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPoles {
    /// Real poles evenly spaced over `[ω_l, ω_h]`.
    #[default]
    Linear,
    /// Real poles log-spaced over `[ω_l, ω_h]`.
    Logarithmic,
}

/// Poles closed under conjugation, conjugate pairs adjacent.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    entries: Vec<Pole>,
}

impl PoleSet {
    pub fn new(entries: Vec<Pole>) -> Result<Self> {
        for e in &entries {
            let ok = match *e {
                Pole::Real(p) => p.is_finite(),
                Pole::Pair(p) => p.im > 0.0 && p.re.is_finite() && p.im.is_finite(),
            };
            if !ok {
                return Err(Error::Domain(format!("invalid pole entry {e:?}")));
            }
        }
        Ok(PoleSet { entries })
    }

    pub fn real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&p| Pole::Real(p)).collect())
    }

    /// `count` real poles spread over `[lower, upper]`.
    pub fn initial(kind: InitPoles, count: usize, lower: f64, upper: f64) -> Self {
        let values: Vec<f64> = match count {
            0 => vec![],
            1 => vec![(lower * upper).sqrt()],
            _ => (0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    match kind {
                        InitPoles::Linear => lower + (upper - lower) * t,
                        InitPoles::Logarithmic => lower * (upper / lower).powf(t),
                    }
                })
                .collect(),
        };
        PoleSet {
            entries: values.into_iter().map(Pole::Real).collect(),
        }
    }

    /// Groups a conjugation-closed list into real entries and pairs.
    ///
    /// Entries with `|Im p| <= tol·|p|` are treated as real. Output is sorted
    /// by modulus.
    pub fn from_conjugate_closed(values: &[Complex64], tol: f64) -> Result<Self> {
        let mut reals = Vec::new();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for &p in values {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(Error::Domain(format!("non-finite pole {p}")));
            }
            if p.im.abs() <= tol * p.norm() {
                reals.push(p.re);
            } else if p.im > 0.0 {
                upper.push(p);
            } else {
                lower.push(p);
            }
        }
        if upper.len() != lower.len() {
            return Err(Error::Domain(format!(
                "poles are not closed under conjugation: {} above vs {} below the real axis",
                upper.len(),
                lower.len()
            )));
        }
        let mut entries: Vec<Pole> = reals.into_iter().map(Pole::Real).collect();
        for p in upper {
            // nearest partner for each upper member
            let (idx, dist) = lower
                .iter()
                .enumerate()
                .map(|(i, q)| (i, (p - q.conj()).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("counts match");
            if dist > 1e-8 * p.norm().max(1e-300) {
                return Err(Error::Domain(format!("pole {p} has no conjugate partner")));
            }
            let q = lower.swap_remove(idx);
            // average so the pair is exact
            let avg = Complex64::new(0.5 * (p.re + q.re), 0.5 * (p.im - q.im));
            entries.push(Pole::Pair(avg));
        }
        entries.sort_by(|a, b| modulus(a).total_cmp(&modulus(b)));
        Ok(PoleSet { entries })
    }

    pub fn entries(&self) -> &[Pole] {
        &self.entries
    }

    /// Total number of scalar poles, `N + 1`.
    pub fn order(&self) -> usize {
        self.entries.iter().map(Pole::width).sum()
    }

    /// Scalar poles in order, each pair as `p, conj(p)`.
    pub fn expanded(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.order());
        for e in &self.entries {
            match *e {
                Pole::Real(p) => out.push(Complex64::new(p, 0.0)),
                Pole::Pair(p) => {
                    out.push(p);
                    out.push(p.conj());
                }
            }
        }
        out
    }

    /// Realified basis at `s`: `1/(s+p)` per real pole and, per pair,
    /// `1/(s+p) + 1/(s+p̄)` and `j/(s+p) - j/(s+p̄)`.
    pub fn basis(&self, s: Complex64) -> Vec<Complex64> {
        let j = Complex64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(self.order());
        for e in &self.entries {
            match *e {
                Pole::Real(p) => out.push(1.0 / (s + p)),
                Pole::Pair(p) => {
                    let a = 1.0 / (s + p);
                    let b = 1.0 / (s + p.conj());
                    out.push(a + b);
                    out.push(j * a - j * b);
                }
            }
        }
        out
    }

    /// Maps realified coefficients back to one complex residue per scalar
    /// pole: a pair `(θ₁, θ₂)` becomes `θ₁ + jθ₂, θ₁ - jθ₂`.
    pub fn expand_coefficients(&self, theta: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(theta.len(), self.order());
        let mut out = Vec::with_capacity(theta.len());
        let mut k = 0;
        for e in &self.entries {
            match e {
                Pole::Real(_) => {
                    out.push(Complex64::new(theta[k], 0.0));
                    k += 1;
                }
                Pole::Pair(_) => {
                    let r = Complex64::new(theta[k], theta[k + 1]);
                    out.push(r);
                    out.push(r.conj());
                    k += 2;
                }
            }
        }
        out
    }

    /// Inverse of [`expand_coefficients`](Self::expand_coefficients).
    pub fn realify_coefficients(&self, residues: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(residues.len());
        let mut k = 0;
        for e in &self.entries {
            match e {
                Pole::Real(_) => {
                    out.push(residues[k].re);
                    k += 1;
                }
                Pole::Pair(_) => {
                    out.push(residues[k].re);
                    out.push(residues[k].im);
                    k += 2;
                }
            }
        }
        out
    }

    /// All poles strictly in the open left half-plane (`Re p > 0`).
    pub fn is_stable(&self) -> bool {
        self.entries.iter().all(|e| match *e {
            Pole::Real(p) => p > 0.0,
            Pole::Pair(p) => p.re > 0.0,
        })
    }

    /// Some two scalar poles coincide (to relative `tol`).
    pub fn has_duplicates(&self, tol: f64) -> bool {
        let all = self.expanded();
        all.iter().enumerate().any(|(i, p)| {
            all[i + 1..]
                .iter()
                .any(|q| (p - q).norm() <= tol * p.norm().max(q.norm()).max(1e-300))
        })
    }
}

fn modulus(p: &Pole) -> f64 {
    match *p {
        Pole::Real(p) => p.abs(),
        Pole::Pair(p) => p.norm(),
    }
}
