use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Deserialize;

use super::grid::SamplingGrid;
use super::target_sum_op;
use crate::error::{Error, Result};
use crate::nabla::FracOrder;
use crate::nlt::TransformFn;

/// Finite stand-in for `1/s^α`: `Ŝ(s) = Σ c_i/(s+ω_i) [+ d]`.
///
/// `poles` holds the `ω_i` (the pole sits at `−ω_i`). With `has_integrator`
/// the first pole is exactly `0` and its residue is `c_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalApproximant {
    alpha: f64,
    poles: Vec<Complex64>,
    residues: Vec<Complex64>,
    direct: Option<f64>,
    has_integrator: bool,
    fit_error: f64,
    history: Vec<f64>,
}

impl RationalApproximant {
    /// Checks lengths, conjugation closure and the integrator convention.
    /// `fit_error` starts as NaN until set or measured.
    pub fn new(
        alpha: f64,
        poles: Vec<Complex64>,
        residues: Vec<Complex64>,
        direct: Option<f64>,
        has_integrator: bool,
    ) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::Domain("approximant needs at least one pole".into()));
        }
        if poles.len() != residues.len() {
            return Err(Error::Dimension(format!(
                "{} poles but {} residues",
                poles.len(),
                residues.len()
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("order must be positive, got {alpha}")));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !poles.iter().chain(&residues).all(finite) || direct.is_some_and(|d| !d.is_finite()) {
            return Err(Error::Domain("non-finite pole, residue or direct term".into()));
        }
        if has_integrator && poles[0] != Complex64::new(0.0, 0.0) {
            return Err(Error::Domain(format!(
                "integrator approximant must list pole 0 first, found {}",
                poles[0]
            )));
        }
        check_closure(&poles, &residues)?;
        Ok(RationalApproximant {
            alpha,
            poles,
            residues,
            direct,
            has_integrator,
            fit_error: f64::NAN,
            history: Vec::new(),
        })
    }

    pub(crate) fn with_fit_record(mut self, fit_error: f64, history: Vec<f64>) -> Self {
        self.fit_error = fit_error;
        self.history = history;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn residues(&self) -> &[Complex64] {
        &self.residues
    }

    pub fn direct(&self) -> Option<f64> {
        self.direct
    }

    pub fn has_integrator(&self) -> bool {
        self.has_integrator
    }

    /// `N`, one less than the number of poles.
    pub fn order(&self) -> usize {
        self.poles.len() - 1
    }

    /// `J` on the identification grid (NaN for hand-built approximants).
    pub fn fit_error(&self) -> f64 {
        self.fit_error
    }

    /// `J` after each relocation step.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Residue of the integrator pole, if present.
    pub fn integrator_residue(&self) -> Option<f64> {
        self.has_integrator.then(|| self.residues[0].re)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let sum: Complex64 = self.poles.iter().zip(&self.residues).map(|(w, c)| c / (s + w)).sum();
        sum + self.direct.unwrap_or(0.0)
    }

    /// Non-integrator poles all in the open left half-plane.
    pub fn is_stable(&self) -> bool {
        self.stepping_poles().all(|w| w.re > 0.0)
    }

    /// `min |1 + ω_i|` over all poles (including the integrator).
    pub fn min_step_modulus(&self) -> f64 {
        self.poles
            .iter()
            .map(|w| (1.0 + w).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn stepping_poles(&self) -> impl Iterator<Item = &Complex64> {
        self.poles.iter().skip(usize::from(self.has_integrator))
    }

    /// The approximant as a nabla transform, valid for `|1−s| < min |1+ω_i|`.
    pub fn transform(&self) -> Result<TransformFn> {
        let me = self.clone();
        TransformFn::new(self.min_step_modulus(), move |s| me.eval(s))
    }

    /// Structured text: alpha, N, has_integrator, direct, J, poles,
    /// residues, history. Floats keep 17 significant digits.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha = {}", fmt_f64(self.alpha));
        let _ = writeln!(out, "N = {}", self.order());
        let _ = writeln!(out, "has_integrator = {}", self.has_integrator);
        if let Some(d) = self.direct {
            let _ = writeln!(out, "direct = {}", fmt_f64(d));
        }
        if self.fit_error.is_finite() {
            let _ = writeln!(out, "J = {}", fmt_f64(self.fit_error));
        }
        let _ = writeln!(out, "poles = {}", fmt_pairs(&self.poles));
        let _ = writeln!(out, "residues = {}", fmt_pairs(&self.residues));
        let hist: Vec<String> = self.history.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "history = [{}]", hist.join(", "));
        out
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            alpha: f64,
            #[serde(rename = "N")]
            n: usize,
            has_integrator: bool,
            direct: Option<f64>,
            #[serde(rename = "J")]
            j: Option<f64>,
            poles: Vec<[f64; 2]>,
            residues: Vec<[f64; 2]>,
            #[serde(default)]
            history: Vec<f64>,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::Parse(format!("approximant: {e}")))?;
        let c = |v: Vec<[f64; 2]>| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect::<Vec<_>>();
        if doc.poles.len() != doc.n + 1 {
            return Err(Error::Parse(format!(
                "approximant: N = {} but {} poles listed",
                doc.n,
                doc.poles.len()
            )));
        }
        let approx = Self::new(doc.alpha, c(doc.poles), c(doc.residues), doc.direct, doc.has_integrator)
            .map_err(|e| Error::Parse(format!("approximant: {e}")))?;
        Ok(approx.with_fit_record(doc.j.unwrap_or(f64::NAN), doc.history))
    }
}

/// `J = Σ_l |S_α(jζ_l) − Ŝ(jζ_l)|²`.
pub fn error_j(approx: &RationalApproximant, alpha: FracOrder, grid: &SamplingGrid) -> f64 {
    grid.points()
        .map(|s| {
            let exact = target_sum_op(alpha, s).expect("grid points lie off the branch cut");
            (exact - approx.eval(s)).norm_sqr()
        })
        .sum()
}

fn check_closure(poles: &[Complex64], residues: &[Complex64]) -> Result<()> {
    let mut i = 0;
    while i < poles.len() {
        if poles[i].im == 0.0 {
            if residues[i].im != 0.0 {
                return Err(Error::Domain(format!(
                    "real pole {} has complex residue {}",
                    poles[i], residues[i]
                )));
            }
            i += 1;
            continue;
        }
        let ok = i + 1 < poles.len() && poles[i + 1] == poles[i].conj() && residues[i + 1] == residues[i].conj();
        if !ok {
            return Err(Error::Domain(format!(
                "pole {} is not followed by its exact conjugate with conjugate residue",
                poles[i]
            )));
        }
        i += 2;
    }
    Ok(())
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_pairs(values: &[Complex64]) -> String {
    let items: Vec<String> = values
        .iter()
        .map(|z| format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im)))
        .collect();
    format!("[\n  {},\n]", items.join(",\n  "))
}
