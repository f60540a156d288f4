use num_complex::Complex64;

use super::approximant::{error_j, RationalApproximant};
use super::grid::SamplingGrid;
use super::ls::{assemble_ls, fit_residues, solve_ls};
use super::poles::{InitPoles, PoleSet};
use super::relocate::relocate_poles;
use super::target_sum_op;
use crate::error::{Error, Result};
use crate::nabla::FracOrder;

/// Order, iteration count and initial pole placement of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// `N`: the approximant has `N + 1` poles.
    pub order: usize,
    /// `T`: relocation cycles before the final residue fit.
    pub iterations: usize,
    pub init: InitPoles,
}

impl FitConfig {
    pub fn new(order: usize, iterations: usize) -> Self {
        FitConfig {
            order,
            iterations,
            init: InitPoles::default(),
        }
    }

    pub fn with_init(mut self, init: InitPoles) -> Self {
        self.init = init;
        self
    }
}

/// Result of fitting arbitrary samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFit {
    pub poles: PoleSet,
    pub residues: Vec<Complex64>,
    pub direct: Option<f64>,
    /// Sample-space `J` after each relocation.
    pub history: Vec<f64>,
}

impl RationalFit {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        sum_terms(&self.poles, &self.residues, self.direct, s)
    }
}

fn sum_terms(poles: &PoleSet, residues: &[Complex64], direct: Option<f64>, s: Complex64) -> Complex64 {
    poles
        .expanded()
        .iter()
        .zip(residues)
        .map(|(p, c)| c / (s + p))
        .sum::<Complex64>()
        + direct.unwrap_or(0.0)
}

fn sample_error(grid: &SamplingGrid, target: &[Complex64], fit: impl Fn(Complex64) -> Complex64) -> f64 {
    grid.points().zip(target).map(|(s, t)| (t - fit(s)).norm_sqr()).sum()
}

/// Vector fitting of `target` sampled on `grid`, starting from `init`.
///
/// Each of the `iterations` cycles solves the linearized problem, moves the
/// poles to the zeros of `h` and records `J` of the residue fit on the new
/// poles. Errors carry the 1-based cycle in which they occurred.
pub fn fit_samples(
    grid: &SamplingGrid,
    target: &[Complex64],
    init: PoleSet,
    iterations: usize,
    with_direct: bool,
) -> Result<RationalFit> {
    fit_scored(grid, target, init, iterations, with_direct, |p, r, d| {
        sample_error(grid, target, |s| sum_terms(p, r, d, s))
    })
}

fn fit_scored(
    grid: &SamplingGrid,
    target: &[Complex64],
    init: PoleSet,
    iterations: usize,
    with_direct: bool,
    score: impl Fn(&PoleSet, &[Complex64], Option<f64>) -> f64,
) -> Result<RationalFit> {
    if iterations == 0 {
        return Err(Error::Configuration(
            "at least one iteration (T >= 1) is required".into(),
        ));
    }
    let n = init.order();
    if n == 0 {
        return Err(Error::Configuration("at least one pole is required".into()));
    }
    grid.check_capacity(n - 1)?;
    let mut poles = init;
    let mut history = Vec::with_capacity(iterations);
    let mut last = None;
    for t in 1..=iterations {
        let step = || -> Result<(PoleSet, Vec<Complex64>, Option<f64>)> {
            let (phi, y) = assemble_ls(grid, target, &poles, with_direct)?;
            let aux = solve_ls(&phi, &y, &poles, with_direct)?;
            let next = relocate_poles(&poles, &aux.lambda)?;
            let (res, d) = fit_residues(grid, target, &next, with_direct)?;
            Ok((next, res, d))
        };
        let (next, res, d) = step().map_err(|e| e.at_iteration(t))?;
        history.push(score(&next, &res, d));
        poles = next;
        last = Some((res, d));
    }
    let (residues, direct) = last.expect("iterations >= 1");
    Ok(RationalFit {
        poles,
        residues,
        direct,
        history,
    })
}

fn operator_target(alpha: FracOrder, grid: &SamplingGrid) -> Vec<Complex64> {
    grid.sample(|s| target_sum_op(alpha, s).expect("grid points lie off the branch cut"))
}

/// Final residue identification on fixed poles against `1/s^α`.
pub fn identify_residues(
    poles: &PoleSet,
    grid: &SamplingGrid,
    alpha: FracOrder,
    with_direct: bool,
) -> Result<RationalApproximant> {
    let target = operator_target(alpha, grid);
    let (residues, direct) = fit_residues(grid, &target, poles, with_direct)?;
    let approx = RationalApproximant::new(alpha.value(), poles.expanded(), residues, direct, false)?;
    let j = error_j(&approx, alpha, grid);
    Ok(approx.with_fit_record(j, Vec::new()))
}

/// Rational approximant of `1/s^α` with `N + 1` poles and no direct term.
pub fn fit_operator(alpha: FracOrder, grid: &SamplingGrid, cfg: FitConfig) -> Result<RationalApproximant> {
    let init = PoleSet::initial(cfg.init, cfg.order + 1, grid.lower(), grid.upper());
    fit_operator_from(alpha, grid, init, cfg.iterations)
}

/// [`fit_operator`] with caller-chosen initial poles.
pub fn fit_operator_from(
    alpha: FracOrder,
    grid: &SamplingGrid,
    init: PoleSet,
    iterations: usize,
) -> Result<RationalApproximant> {
    let target = operator_target(alpha, grid);
    let fit = fit_samples(grid, &target, init, iterations, false)?;
    let approx = RationalApproximant::new(alpha.value(), fit.poles.expanded(), fit.residues, None, false)?;
    let j = error_j(&approx, alpha, grid);
    Ok(approx.with_fit_record(j, fit.history))
}

/// Approximant `c_0/s + Σ_{i=1}^{N} c_i/(s+ω_i)` with a forced pole at zero.
///
/// Fits `s^{1−α} ≈ d + Σ r_i/(s+ω_i)` and divides by `s`:
/// `c_0 = d + Σ r_i/ω_i`, `c_i = −r_i/ω_i`.
pub fn fit_with_integrator(alpha: FracOrder, grid: &SamplingGrid, cfg: FitConfig) -> Result<RationalApproximant> {
    if cfg.order == 0 {
        return Err(Error::Configuration("integrator variant needs N >= 1".into()));
    }
    let a = alpha.value();
    let init = PoleSet::initial(cfg.init, cfg.order, grid.lower(), grid.upper());
    let shaped = grid.sample(|s| s.powf(1.0 - a));
    let (poles, r, d, history) = if a == 1.0 {
        // constant target: relocation has nothing to fit, h would be singular
        grid.check_capacity(cfg.order - 1)?;
        let (r, d) = fit_residues(grid, &shaped, &init, true)?;
        (init, r, d.expect("direct requested"), Vec::new())
    } else {
        let fit = fit_scored(grid, &shaped, init, cfg.iterations, true, |p, r, d| {
            integrator_form(a, p, r, d.expect("direct requested")).map_or(f64::NAN, |s| error_j(&s, alpha, grid))
        })?;
        let d = fit.direct.expect("direct requested");
        (fit.poles, fit.residues, d, fit.history)
    };
    let approx = integrator_form(a, &poles, &r, d)?;
    let j = error_j(&approx, alpha, grid);
    let history = if history.is_empty() { vec![j] } else { history };
    Ok(approx.with_fit_record(j, history))
}

/// `(d + Σ r_i/(s+ω_i))/s` in pole–residue form.
pub fn integrator_form(alpha: f64, poles: &PoleSet, r: &[Complex64], d: f64) -> Result<RationalApproximant> {
    let omegas = poles.expanded();
    let scale = omegas.iter().map(|w| w.norm()).fold(0.0, f64::max).max(1.0);
    if let Some(w) = omegas.iter().find(|w| w.norm() <= 1e-14 * scale) {
        return Err(Error::Division(format!(
            "fitted pole {w} is numerically zero; integrator conversion is singular"
        )));
    }
    let mut c0 = Complex64::new(d, 0.0);
    let mut pole_out = vec![Complex64::new(0.0, 0.0)];
    let mut res_out = vec![Complex64::new(0.0, 0.0)];
    for (w, ri) in omegas.iter().zip(r) {
        let q = ri / w;
        c0 += q;
        pole_out.push(*w);
        res_out.push(-q);
    }
    res_out[0] = Complex64::new(c0.re, 0.0);
    RationalApproximant::new(alpha, pole_out, res_out, None, true)
}
