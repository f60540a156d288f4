use std::path::Path;

use rayon::prelude::*;

use super::config::{Command, Settings};
use super::expr::Expr;
use crate::error::{Error, Result};
use crate::fdm::{simulate_operator, simulate_system};
use crate::nabla::{exact_solve, frac_sum, FracOrder};
use crate::nlt::{inlt_range, ContourSpec, InverseSample, TransformFn};
use crate::system::Trajectory;
use crate::trace::SignalTrace;
use crate::vecfit::{
    fit_operator, fit_with_integrator, fmt_f64, make_grid, FitConfig, RationalApproximant, SamplingGrid,
};

pub const TABLE1_ALPHAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const TABLE_ORDERS: [usize; 4] = [5, 10, 15, 20];
pub const TABLE2_ITERATIONS: [usize; 9] = [3, 6, 9, 11, 12, 15, 16, 18, 21];

/// Validity radius assumed for transforms typed as expressions.
pub const EXPRESSION_RADIUS: f64 = 1.0;

fn grid(s: &Settings) -> Result<SamplingGrid> {
    make_grid(s.wl, s.wh, s.samples)
}

fn fit_config(s: &Settings, order: usize, iterations: usize) -> FitConfig {
    FitConfig::new(order, iterations).with_init(s.init)
}

/// The approximant of `cmd_fit`, with its per-iteration `J` history.
pub fn run_fit(s: &Settings) -> Result<RationalApproximant> {
    let cfg = fit_config(s, s.order, s.iterations);
    let g = grid(s)?;
    if s.integrator {
        fit_with_integrator(s.order_alpha(), &g, cfg)
    } else {
        fit_operator(s.order_alpha(), &g, cfg)
    }
}

/// `J` for every cell of a row × column grid of fits.
#[derive(Debug, Clone)]
pub struct Table {
    pub row_key: &'static str,
    pub rows: Vec<f64>,
    pub col_key: &'static str,
    pub cols: Vec<usize>,
    /// `cells[r][c]`, row-major.
    pub cells: Vec<Vec<RationalApproximant>>,
}

impl Table {
    pub fn j(&self, r: usize, c: usize) -> f64 {
        self.cells[r][c].fit_error()
    }

    pub fn approximants(&self) -> impl Iterator<Item = &RationalApproximant> {
        self.cells.iter().flatten()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut header = vec![self.row_key.to_string()];
        header.extend(self.cols.iter().map(|c| format!("{}={c}", self.col_key)));
        let rows = self.rows.iter().zip(&self.cells).map(|(r, cells)| {
            let mut rec = vec![format!("{r:?}")];
            rec.extend(cells.iter().map(|a| fmt_f64(a.fit_error())));
            rec
        });
        csv_text(&header, rows)
    }
}

fn table(
    row_key: &'static str,
    rows: Vec<f64>,
    col_key: &'static str,
    cols: Vec<usize>,
    fit: impl Fn(f64, usize) -> Result<RationalApproximant> + Sync,
) -> Result<Table> {
    let pairs: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|r| (0..cols.len()).map(move |c| (r, c)))
        .collect();
    let flat: Vec<RationalApproximant> = pairs
        .par_iter()
        .map(|&(r, c)| fit(rows[r], cols[c]))
        .collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    let cells = rows.iter().map(|_| it.by_ref().take(cols.len()).collect()).collect();
    Ok(Table {
        row_key,
        rows,
        col_key,
        cols,
        cells,
    })
}

/// `J` over `α ∈ {0.1,…,0.9} × N ∈ {5,10,15,20}` at fixed `T`.
pub fn run_table1(s: &Settings) -> Result<Table> {
    let g = grid(s)?;
    table(
        "alpha",
        TABLE1_ALPHAS.to_vec(),
        "N",
        TABLE_ORDERS.to_vec(),
        |alpha, n| fit_operator(FracOrder::new(alpha)?, &g, fit_config(s, n, s.iterations)),
    )
}

/// `J` over `N ∈ {5,10,15,20} × T ∈ {3,…,21}` at fixed `α`.
pub fn run_table2(s: &Settings) -> Result<Table> {
    let g = grid(s)?;
    let alpha = s.order_alpha();
    let rows = TABLE_ORDERS.iter().map(|&n| n as f64).collect();
    table("N", rows, "T", TABLE2_ITERATIONS.to_vec(), |n, t| {
        fit_operator(alpha, &g, fit_config(s, n as usize, t))
    })
}

/// Oracle and approximation side by side.
#[derive(Debug, Clone)]
pub struct ExampleRun {
    pub id: u8,
    pub u: SignalTrace,
    pub y_exact: SignalTrace,
    pub y_approx: SignalTrace,
    pub approximant: RationalApproximant,
}

impl ExampleRun {
    /// `ε(k) = y_exact(k) − y_approx(k)`.
    pub fn eps(&self) -> Vec<f64> {
        self.y_exact
            .values()
            .iter()
            .zip(self.y_approx.values())
            .map(|(e, a)| e - a)
            .collect()
    }

    pub fn max_abs_error(&self) -> f64 {
        self.eps().iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    /// `max_k |ε(k)| / |y_exact(k)|` over samples with `y_exact(k) ≠ 0`.
    pub fn max_pointwise_relative_error(&self) -> f64 {
        self.eps()
            .iter()
            .zip(self.y_exact.values())
            .filter(|(_, y)| **y != 0.0)
            .fold(0.0, |m, (e, y)| m.max((e / y).abs()))
    }

    /// `max_k |ε(k)| / max_k |y_exact(k)|`.
    pub fn max_normalized_error(&self) -> f64 {
        let scale = self.y_exact.values().iter().fold(0.0, |m: f64, y| m.max(y.abs()));
        if scale == 0.0 {
            self.max_abs_error()
        } else {
            self.max_abs_error() / scale
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let header = ["k", "u", "y_exact", "y_approx", "eps"].map(String::from);
        let eps = self.eps();
        let rows = (0..self.u.len()).map(|m| {
            vec![
                (self.u.initial_instant() + m as i64).to_string(),
                fmt_f64(self.u.values()[m]),
                fmt_f64(self.y_exact.values()[m]),
                fmt_f64(self.y_approx.values()[m]),
                fmt_f64(eps[m]),
            ]
        });
        csv_text(&header, rows)
    }
}

/// Example 1 runs the bare sum operator; examples 2 and 3 run a system
/// from `x(a) = x0` with an integrator-equipped approximant.
pub fn run_example(s: &Settings) -> Result<ExampleRun> {
    let Command::Example(id) = s.command else {
        return Err(Error::Configuration(format!(
            "`{}` is not an example command",
            s.command
        )));
    };
    let alpha = s.order_alpha();
    let g = grid(s)?;
    let cfg = fit_config(s, s.order, s.iterations);
    let u = s.input.trace(s.a, s.horizon)?;
    if id == 1 {
        let approximant = fit_operator(alpha, &g, cfg)?;
        let y_exact = frac_sum(&u, alpha)?;
        let y_approx = simulate_operator(&approximant, &u)?;
        return Ok(ExampleRun {
            id,
            u,
            y_exact,
            y_approx,
            approximant,
        });
    }
    let approximant = fit_with_integrator(alpha, &g, cfg)?;
    let sys = s.system.build(alpha, s.a, s.x0);
    let exact = exact_solve(&sys, &u, s.horizon)?;
    let approx = simulate_system(&sys, &u, std::slice::from_ref(&approximant), s.horizon)?;
    Ok(ExampleRun {
        id,
        u,
        y_exact: exact.output(0).clone(),
        y_approx: approx.output(0).clone(),
        approximant,
    })
}

/// Result of `simulate`: the trajectory and the input that drove it.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub u: SignalTrace,
    pub trajectory: Trajectory,
    pub approximant: RationalApproximant,
}

impl SimulationRun {
    pub fn to_csv(&self) -> Result<String> {
        let tr = &self.trajectory;
        let mut header = vec!["k".to_string(), "u".to_string()];
        header.extend((1..=tr.states.len()).map(|j| format!("x_{j}")));
        header.extend((1..=tr.outputs.len()).map(|j| format!("y_{j}")));
        let rows = (0..self.u.len()).map(|m| {
            let mut rec = vec![
                (self.u.initial_instant() + m as i64).to_string(),
                fmt_f64(self.u.values()[m]),
            ];
            rec.extend(tr.states.iter().map(|x| fmt_f64(x.values()[m])));
            rec.extend(tr.outputs.iter().map(|y| fmt_f64(y.values()[m])));
            rec
        });
        csv_text(&header, rows)
    }
}

pub fn load_approximant(path: &Path) -> Result<RationalApproximant> {
    let text = std::fs::read_to_string(path)?;
    RationalApproximant::from_toml(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Simulates the selected system with a fitted or loaded approximant.
/// A nonzero `x0` (or `integrator = true`) selects the integrator variant.
pub fn run_simulate(s: &Settings) -> Result<SimulationRun> {
    let alpha = s.order_alpha();
    let approximant = match &s.approx {
        Some(path) => load_approximant(path)?,
        None => {
            let g = grid(s)?;
            let cfg = fit_config(s, s.order, s.iterations);
            if s.integrator || s.x0 != 0.0 {
                fit_with_integrator(alpha, &g, cfg)?
            } else {
                fit_operator(alpha, &g, cfg)?
            }
        }
    };
    let u = s.input.trace(s.a, s.horizon)?;
    let sys = s.system.build(alpha, s.a, s.x0);
    let trajectory = simulate_system(&sys, &u, std::slice::from_ref(&approximant), s.horizon)?;
    Ok(SimulationRun {
        u,
        trajectory,
        approximant,
    })
}

/// Transform named by `--transform` (validity radius [`EXPRESSION_RADIUS`])
/// or `--approx`.
pub fn invert_source(s: &Settings) -> Result<TransformFn> {
    match (&s.transform, &s.approx) {
        (Some(text), _) => {
            let e = Expr::parse(text)?;
            TransformFn::new(EXPRESSION_RADIUS, move |z| e.eval(z))
        }
        (None, Some(path)) => load_approximant(path)?.transform(),
        (None, None) => Err(Error::Configuration("invert needs --transform or --approx".into())),
    }
}

/// `f(a+1), …, f(a+horizon)` by contour inversion.
pub fn run_invert(s: &Settings) -> Result<Vec<InverseSample>> {
    let tf = invert_source(s)?;
    let contour = ContourSpec::new(s.radius, s.nodes)?;
    inlt_range(&tf, s.a, s.horizon, &contour)
}

pub fn inverse_csv(samples: &[InverseSample]) -> Result<String> {
    let header = ["k", "f", "imag_residue", "radius"].map(String::from);
    let rows = samples.iter().map(|p| {
        vec![
            p.k.to_string(),
            fmt_f64(p.value),
            fmt_f64(p.imag_residue),
            fmt_f64(p.radius),
        ]
    });
    csv_text(&header, rows)
}

fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are ASCII"))
}
