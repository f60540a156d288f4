use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Deserialize;

use super::input::InputSpec;
use crate::error::{Error, Result};
use crate::nabla::FracOrder;
use crate::system::{Dynamics, SystemSpec};
use crate::vecfit::{fmt_f64, InitPoles};

/// Flat key–value settings, as given on the command line or in a config
/// file. Unset keys fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: Option<f64>,
    #[serde(rename = "N")]
    pub order: Option<usize>,
    #[serde(rename = "T")]
    pub iterations: Option<usize>,
    #[serde(rename = "L")]
    pub samples: Option<usize>,
    pub wl: Option<f64>,
    pub wh: Option<f64>,
    pub a: Option<i64>,
    pub horizon: Option<usize>,
    pub x0: Option<f64>,
    pub input: Option<String>,
    pub out: Option<String>,
    pub integrator: Option<bool>,
    pub init: Option<String>,
    pub system: Option<String>,
    pub transform: Option<String>,
    pub approx: Option<String>,
    pub radius: Option<f64>,
    pub nodes: Option<usize>,
}

macro_rules! each_key {
    ($m:ident) => {
        $m!(alpha, "alpha", float);
        $m!(order, "N", int);
        $m!(iterations, "T", int);
        $m!(samples, "L", int);
        $m!(wl, "wl", float);
        $m!(wh, "wh", float);
        $m!(a, "a", int);
        $m!(horizon, "horizon", int);
        $m!(x0, "x0", float);
        $m!(input, "input", text);
        $m!(out, "out", text);
        $m!(integrator, "integrator", flag);
        $m!(init, "init", text);
        $m!(system, "system", text);
        $m!(transform, "transform", text);
        $m!(approx, "approx", text);
        $m!(radius, "radius", float);
        $m!(nodes, "nodes", int);
    };
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Set keys only, one per line, floats at 17 significant digits.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        macro_rules! render {
            ($field:ident, $key:expr, float) => {
                if let Some(v) = self.$field {
                    out.push_str(&format!("{} = {}\n", $key, fmt_f64(v)));
                }
            };
            ($field:ident, $key:expr, text) => {
                if let Some(v) = &self.$field {
                    out.push_str(&format!("{} = {}\n", $key, toml::Value::String(v.clone())));
                }
            };
            ($field:ident, $key:expr, $other:ident) => {
                if let Some(v) = self.$field {
                    out.push_str(&format!("{} = {}\n", $key, v));
                }
            };
        }
        each_key!(render);
        out
    }

    /// Keys set in `self` win over keys set in `lower`.
    pub fn over(&self, lower: &ExperimentConfig) -> ExperimentConfig {
        let mut merged = lower.clone();
        macro_rules! take {
            ($field:ident, $key:expr, $kind:ident) => {
                if self.$field.is_some() {
                    merged.$field = self.$field.clone();
                }
            };
        }
        each_key!(take);
        merged
    }

    fn is_set(&self, key: &str) -> bool {
        let mut set = false;
        macro_rules! probe {
            ($field:ident, $key:expr, $kind:ident) => {
                if key == $key {
                    set = self.$field.is_some();
                }
            };
        }
        each_key!(probe);
        set
    }
}

/// A config file kept with its text so diagnostics can name lines.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    pub path: PathBuf,
    text: String,
    pub values: ExperimentConfig,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(path, text)
    }

    pub fn parse(path: &Path, text: String) -> Result<Self> {
        let values = toml::from_str(&text).map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map_or(1, |span| text[..span.start.min(text.len())].matches('\n').count() + 1);
            Error::Config {
                path: path.display().to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        Ok(ConfigFile {
            path: path.to_path_buf(),
            text,
            values,
        })
    }

    /// 1-based line that assigns `key`.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.text
            .lines()
            .position(|line| {
                let line = line.trim_start();
                let bare = line.strip_prefix(key).map(str::trim_start);
                let quoted = line.strip_prefix(&format!("\"{key}\"")).map(str::trim_start);
                matches!(bare.or(quoted), Some(rest) if rest.starts_with('='))
            })
            .map(|i| i + 1)
    }
}

/// Scalar systems selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemKind {
    /// `∇^α x = u`
    Integrator,
    /// `∇^α x = −λ x + u`
    Linear { lambda: f64 },
    /// `∇^α x = −λ x + g·cos²(x(k−1)) + u`
    Nonlinear { lambda: f64, gain: f64 },
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::Integrator => f.write_str("integrator"),
            SystemKind::Linear { lambda } => write!(f, "linear:{lambda:?}"),
            SystemKind::Nonlinear { lambda, gain } => write!(f, "nonlinear:{lambda:?},{gain:?}"),
        }
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("system descriptor: `{t}` is not a finite number")))
        };
        match text.trim().split_once(':') {
            None if text.trim() == "integrator" => Ok(SystemKind::Integrator),
            Some(("linear", l)) => Ok(SystemKind::Linear { lambda: num(l)? }),
            Some(("nonlinear", rest)) => match rest.split_once(',') {
                Some((l, g)) => Ok(SystemKind::Nonlinear {
                    lambda: num(l)?,
                    gain: num(g)?,
                }),
                None => Err(Error::Parse("system descriptor: nonlinear:LAMBDA,GAIN".into())),
            },
            _ => Err(Error::Parse(format!(
                "unknown system `{text}` (expected integrator, linear:LAMBDA or nonlinear:LAMBDA,GAIN)"
            ))),
        }
    }
}

impl SystemKind {
    pub fn build(self, alpha: FracOrder, a: i64, x_a: f64) -> SystemSpec {
        match self {
            SystemKind::Integrator => SystemSpec::integrator(alpha, a, x_a),
            SystemKind::Linear { lambda } => SystemSpec::linear_scalar(alpha, a, x_a, lambda),
            SystemKind::Nonlinear { lambda, gain } => SystemSpec {
                a,
                orders: vec![alpha],
                x_a: vec![x_a],
                dynamics: Dynamics::Affine {
                    gain: DMatrix::from_element(1, 1, -lambda),
                    rest: Arc::new(move |_, past, u| {
                        let prev = past[past.len() - 1][0];
                        vec![gain * prev.cos().powi(2) + u]
                    }),
                },
                output: None,
            },
        }
    }
}

fn parse_init(text: &str) -> Result<InitPoles> {
    match text {
        "linear" => Ok(InitPoles::Linear),
        "log" | "logarithmic" => Ok(InitPoles::Logarithmic),
        other => Err(Error::Parse(format!(
            "unknown initial pole spacing `{other}` (linear or log)"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Simulate,
    Table1,
    Table2,
    Example(u8),
    Invert,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Fit => f.write_str("fit"),
            Command::Simulate => f.write_str("simulate"),
            Command::Table1 => f.write_str("table1"),
            Command::Table2 => f.write_str("table2"),
            Command::Example(n) => write!(f, "example {n}"),
            Command::Invert => f.write_str("invert"),
        }
    }
}

/// Fully resolved, validated parameters of one command run.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub command: Command,
    pub alpha: f64,
    pub order: usize,
    pub iterations: usize,
    pub samples: usize,
    pub wl: f64,
    pub wh: f64,
    pub a: i64,
    pub horizon: usize,
    pub x0: f64,
    pub input: InputSpec,
    pub out: Option<PathBuf>,
    pub integrator: bool,
    pub init: InitPoles,
    pub system: SystemKind,
    pub transform: Option<String>,
    pub approx: Option<PathBuf>,
    pub radius: f64,
    pub nodes: usize,
}

impl Settings {
    /// Frozen defaults: `α = 0.5, a = 5, N = 20, T = 8, L = 100` on
    /// `[0.001, 1000]`, with per-command horizons, inputs and systems.
    pub fn defaults(command: Command) -> Settings {
        let base = Settings {
            command,
            alpha: 0.5,
            order: 20,
            iterations: 8,
            samples: 100,
            wl: 1e-3,
            wh: 1e3,
            a: 5,
            horizon: 50,
            x0: 0.0,
            input: InputSpec::Step { switch: 12 },
            out: None,
            integrator: false,
            init: InitPoles::default(),
            system: SystemKind::Integrator,
            transform: None,
            approx: None,
            radius: 0.5,
            nodes: 256,
        };
        match command {
            Command::Fit => Settings { iterations: 20, ..base },
            Command::Table1 => Settings { iterations: 6, ..base },
            Command::Example(1) => Settings { horizon: 30, ..base },
            Command::Example(2) => Settings {
                x0: 1.0,
                input: InputSpec::Sine {
                    amplitude: 5.0,
                    cycles: 0.2,
                },
                system: SystemKind::Linear { lambda: 2.0 },
                ..base
            },
            Command::Example(3) => Settings {
                x0: 1.0,
                input: InputSpec::Sawtooth {
                    period: 5,
                    amplitude: 5.0,
                },
                system: SystemKind::Nonlinear { lambda: 0.3, gain: 0.5 },
                ..base
            },
            Command::Invert => Settings {
                a: 0,
                horizon: 10,
                ..base
            },
            _ => base,
        }
    }

    /// Layers `flags` over `file` over the command defaults and validates.
    pub fn resolve(command: Command, file: Option<&ConfigFile>, flags: &ExperimentConfig) -> Result<Settings> {
        let empty = ExperimentConfig::default();
        let from_file = file.map_or(&empty, |f| &f.values);
        let cfg = flags.over(from_file);
        let blame = Blame { file, flags };
        let mut s = Settings::defaults(command);
        if let Command::Example(n) = command {
            if !(1..=3).contains(&n) {
                return Err(Error::Configuration(format!("example must be 1, 2 or 3, got {n}")));
            }
        }
        macro_rules! copy {
            ($field:ident) => {
                if let Some(v) = cfg.$field.clone() {
                    s.$field = v;
                }
            };
        }
        copy!(alpha);
        copy!(order);
        copy!(iterations);
        copy!(samples);
        copy!(wl);
        copy!(wh);
        copy!(a);
        copy!(horizon);
        copy!(x0);
        copy!(integrator);
        copy!(radius);
        copy!(nodes);
        if let Some(v) = &cfg.input {
            s.input = v.parse().map_err(|e| blame.at("input", e))?;
        }
        if let Some(v) = &cfg.init {
            s.init = parse_init(v).map_err(|e| blame.at("init", e))?;
        }
        if let Some(v) = &cfg.system {
            s.system = v.parse().map_err(|e| blame.at("system", e))?;
        }
        s.out = cfg.out.as_ref().map(PathBuf::from);
        s.transform = cfg.transform.clone();
        s.approx = cfg.approx.as_ref().map(PathBuf::from);
        s.validate(&blame)?;
        Ok(s)
    }

    fn validate(&self, blame: &Blame) -> Result<()> {
        let fail = |key: &str, msg: String| Err(blame.at(key, Error::Configuration(msg)));
        let fits = !matches!(self.command, Command::Invert);
        let caputo = matches!(self.command, Command::Simulate | Command::Example(_) | Command::Table2);
        if caputo && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail("alpha", format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.command == Command::Fit && !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha", format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if fits {
            if self.order == 0 {
                return fail("N", "N must be at least 1".into());
            }
            if self.iterations == 0 {
                return fail("T", "T must be at least 1".into());
            }
            if !(self.wl > 0.0 && self.wl.is_finite()) {
                return fail("wl", format!("wl must be positive, got {}", self.wl));
            }
            if !(self.wh > self.wl && self.wh.is_finite()) {
                return fail("wh", format!("need wl < wh, got [{}, {}]", self.wl, self.wh));
            }
            let n = match self.command {
                Command::Table1 | Command::Table2 => 20,
                _ => self.order,
            };
            if self.samples <= 2 * n + 2 {
                let key = if blame.is_set("L") || !blame.is_set("N") {
                    "L"
                } else {
                    "N"
                };
                return fail(
                    key,
                    format!(
                        "L > 2N+2 violated: L = {} with N = {n}; raise L or lower N",
                        self.samples
                    ),
                );
            }
        }
        if self.horizon == 0 {
            return fail("horizon", "horizon must be at least 1".into());
        }
        if !self.x0.is_finite() {
            return fail("x0", "x0 must be finite".into());
        }
        if self.command == Command::Example(1) && blame.is_set("x0") && self.x0 != 0.0 {
            return fail(
                "x0",
                "example 1 is the bare sum operator, whose output starts at 0".into(),
            );
        }
        if self.command == Command::Invert {
            if !(self.radius > 0.0 && self.radius.is_finite()) {
                return fail("radius", format!("radius must be positive, got {}", self.radius));
            }
            if self.nodes < 4 {
                return fail("nodes", format!("need at least 4 quadrature nodes, got {}", self.nodes));
            }
            match (&self.transform, &self.approx) {
                (Some(_), Some(_)) => return fail("transform", "give either transform or approx, not both".into()),
                (None, None) => return fail("transform", "invert needs --transform EXPR or --approx FILE".into()),
                _ => {}
            }
        }
        FracOrder::new(self.alpha).map_err(|e| blame.at("alpha", e))?;
        Ok(())
    }

    pub fn order_alpha(&self) -> FracOrder {
        FracOrder::new(self.alpha).expect("validated")
    }
}

struct Blame<'a> {
    file: Option<&'a ConfigFile>,
    flags: &'a ExperimentConfig,
}

impl Blame<'_> {
    fn is_set(&self, key: &str) -> bool {
        self.flags.is_set(key) || self.file.is_some_and(|f| f.values.is_set(key))
    }

    /// Points `err` at the flag or file line that supplied `key`.
    fn at(&self, key: &str, err: Error) -> Error {
        let message = match &err {
            Error::Configuration(m) | Error::Parse(m) | Error::Domain(m) => m.clone(),
            other => other.to_string(),
        };
        if self.flags.is_set(key) {
            return Error::Configuration(format!("--{key}: {message}"));
        }
        if let Some(f) = self.file.filter(|f| f.values.is_set(key)) {
            return Error::Config {
                path: f.path.display().to_string(),
                line: f.line_of(key).unwrap_or(1),
                message,
            };
        }
        Error::Configuration(message)
    }
}
