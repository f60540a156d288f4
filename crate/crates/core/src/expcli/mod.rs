//! Experiment harness behind the `nabla-fdm` binary.
//!
//! Exit codes: `0` success, `2` configuration error, `3` numerical error.

mod commands;
mod config;
mod expr;
mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use commands::{
    inverse_csv, invert_source, load_approximant, run_example, run_fit, run_invert, run_simulate, run_table1,
    run_table2, ExampleRun, SimulationRun, Table, EXPRESSION_RADIUS, TABLE1_ALPHAS, TABLE2_ITERATIONS, TABLE_ORDERS,
};
pub use config::{Command, ConfigFile, ExperimentConfig, Settings, SystemKind};
pub use expr::Expr;
pub use input::InputSpec;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "nabla-fdm",
    version,
    about = "Nabla fractional sums, vector-fitted approximants and their simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Fit a rational approximant of 1/s^alpha and write it as TOML
    Fit,
    /// Simulate a scalar system with a fitted or loaded approximant
    Simulate,
    /// J over alpha in {0.1..0.9} and N in {5,10,15,20}
    Table1,
    /// J over N in {5,10,15,20} and T in {3..21}
    Table2,
    /// Exact vs approximate run of a built-in example
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        n: u8,
    },
    /// Inverse nabla Laplace transform on a contour
    Invert,
}

#[derive(Debug, Args)]
struct Flags {
    /// Fractional order
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Approximation order (N + 1 poles)
    #[arg(long = "N", global = true)]
    order: Option<usize>,
    /// Vector-fitting iterations
    #[arg(long = "T", global = true)]
    iterations: Option<usize>,
    /// Number of frequency samples
    #[arg(long = "L", global = true)]
    samples: Option<usize>,
    /// Lowest sampled frequency
    #[arg(long, global = true)]
    wl: Option<f64>,
    /// Highest sampled frequency
    #[arg(long, global = true)]
    wh: Option<f64>,
    /// Initial instant
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<i64>,
    /// Number of steps after a (invert: number of samples)
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Initial pseudo-state x(a)
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// step[:K] | sine:A,C | sawtooth:P,A | const:V | csv:PATH
    #[arg(long, global = true)]
    input: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<String>,
    /// Flat TOML file with any of the keys above
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Force the integrator variant
    #[arg(long, global = true)]
    integrator: bool,
    /// Initial pole spacing: linear | log
    #[arg(long, global = true)]
    init: Option<String>,
    /// integrator | linear:LAMBDA | nonlinear:LAMBDA,GAIN
    #[arg(long, global = true)]
    system: Option<String>,
    /// Rational expression in s to invert
    #[arg(long, global = true)]
    transform: Option<String>,
    /// Serialized approximant (simulate, invert)
    #[arg(long, global = true)]
    approx: Option<String>,
    /// Contour radius
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Contour quadrature nodes
    #[arg(long, global = true)]
    nodes: Option<usize>,
}

impl Flags {
    fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            alpha: self.alpha,
            order: self.order,
            iterations: self.iterations,
            samples: self.samples,
            wl: self.wl,
            wh: self.wh,
            a: self.a,
            horizon: self.horizon,
            x0: self.x0,
            input: self.input.clone(),
            out: self.out.clone(),
            integrator: self.integrator.then_some(true),
            init: self.init.clone(),
            system: self.system.clone(),
            transform: self.transform.clone(),
            approx: self.approx.clone(),
            radius: self.radius,
            nodes: self.nodes,
        }
    }
}

/// Exit code for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERIC
    }
}

/// A suggestion printed after the error message.
pub fn hint(err: &Error) -> Option<&'static str> {
    match err {
        Error::Iteration { source, .. } => hint(source),
        Error::Conditioning { .. } => Some("poles coincide; change --N, --init or the frequency range"),
        Error::EigenNonConvergence(_) => Some("try fewer iterations (--T) or a smaller --N"),
        Error::Instability { .. } => Some("the approximant has a pole with |1+omega| <= 1; refit it"),
        Error::Division(_) => Some("refit with a different --N or --T"),
        Error::Divergent { .. } => Some("use a --radius below the transform's validity radius"),
        Error::Domain(m) if m.contains("validity radius") => {
            Some("use a --radius below the transform's validity radius")
        }
        Error::Configuration(m) if m.contains("integrator") => Some("pass --integrator or set x0 = 0"),
        Error::StepSingularity { .. } => Some("the implicit step is singular; check the system gain"),
        _ => None,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: Cli, log: &mut dyn Write) -> Result<()> {
    let command = match cli.command {
        Sub::Fit => Command::Fit,
        Sub::Simulate => Command::Simulate,
        Sub::Table1 => Command::Table1,
        Sub::Table2 => Command::Table2,
        Sub::Example { n } => Command::Example(n),
        Sub::Invert => Command::Invert,
    };
    let file = cli.flags.config.as_deref().map(ConfigFile::load).transpose()?;
    let s = Settings::resolve(command, file.as_ref(), &cli.flags.to_config())?;
    let out = s.out.as_deref();
    match command {
        Command::Fit => {
            let ap = run_fit(&s)?;
            let _ = writeln!(log, "J = {:e}", ap.fit_error());
            for (t, j) in ap.history().iter().enumerate() {
                let _ = writeln!(log, "  iteration {:>2}: J = {j:e}", t + 1);
            }
            emit(out, &ap.to_toml())
        }
        Command::Simulate => emit(out, &run_simulate(&s)?.to_csv()?),
        Command::Table1 => emit(out, &run_table1(&s)?.to_csv()?),
        Command::Table2 => emit(out, &run_table2(&s)?.to_csv()?),
        Command::Example(_) => {
            let run = run_example(&s)?;
            let _ = writeln!(
                log,
                "example {}: J = {:e}, max |eps| = {:e}, max |eps|/|y| = {:e}, max |eps| / max |y| = {:e}",
                run.id,
                run.approximant.fit_error(),
                run.max_abs_error(),
                run.max_pointwise_relative_error(),
                run.max_normalized_error()
            );
            emit(out, &run.to_csv()?)
        }
        Command::Invert => {
            let samples = run_invert(&s)?;
            for w in samples.iter().filter_map(|p| p.warning()) {
                let _ = writeln!(log, "warning: {w}");
            }
            emit(out, &inverse_csv(&samples)?)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to `log`.
pub fn run<I, T>(args: I, log: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(log, "{}", e.render());
            return code;
        }
    };
    match execute(cli, log) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            if let Some(h) = hint(&e) {
                let _ = writeln!(log, "hint: {h}");
            }
            exit_code(&e)
        }
    }
}
