use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::trace::SignalTrace;

/// Input signal descriptors accepted by `--input`.
///
/// * `step` / `step:K`: `0` for `k ≤ a`, `1` for `a < k ≤ K`, `−1` after (`K = 12` by default)
/// * `sine:A,C`: `A·sin(C·π·k)`
/// * `sawtooth:P,A`: ramps from 0 toward `A` over each period of `P` samples, starting at `a+1`
/// * `const:V`: `V` for `k > a`
/// * `csv:PATH`: column `u` of a CSV file, optionally with a `k` column
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Step { switch: i64 },
    Sine { amplitude: f64, cycles: f64 },
    Sawtooth { period: usize, amplitude: f64 },
    Constant(f64),
    Csv(PathBuf),
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Step { switch } => write!(f, "step:{switch}"),
            InputSpec::Sine { amplitude, cycles } => write!(f, "sine:{amplitude:?},{cycles:?}"),
            InputSpec::Sawtooth { period, amplitude } => write!(f, "sawtooth:{period},{amplitude:?}"),
            InputSpec::Constant(v) => write!(f, "const:{v:?}"),
            InputSpec::Csv(p) => write!(f, "csv:{}", p.display()),
        }
    }
}

fn number(field: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("input descriptor: {field} `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("input descriptor: {field} must be finite")));
    }
    Ok(v)
}

fn args<'a>(kind: &str, rest: Option<&'a str>, count: usize) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = rest.map(|r| r.split(',').collect()).unwrap_or_default();
    if parts.len() != count {
        return Err(Error::Parse(format!(
            "input descriptor `{kind}` takes {count} comma-separated argument(s)"
        )));
    }
    Ok(parts)
}

impl std::str::FromStr for InputSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (text, None),
        };
        match kind {
            "step" => {
                let switch = match rest {
                    None => 12,
                    Some(r) => r
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("input descriptor: step switch `{r}` is not an integer")))?,
                };
                Ok(InputSpec::Step { switch })
            }
            "sine" => {
                let p = args(kind, rest, 2)?;
                Ok(InputSpec::Sine {
                    amplitude: number("amplitude", p[0])?,
                    cycles: number("frequency", p[1])?,
                })
            }
            "sawtooth" => {
                let p = args(kind, rest, 2)?;
                let period: usize = p[0].trim().parse().ok().filter(|&v: &usize| v >= 1).ok_or_else(|| {
                    Error::Parse(format!(
                        "input descriptor: sawtooth period `{}` must be a positive integer",
                        p[0]
                    ))
                })?;
                Ok(InputSpec::Sawtooth {
                    period,
                    amplitude: number("amplitude", p[1])?,
                })
            }
            "const" => {
                let p = args(kind, rest, 1)?;
                Ok(InputSpec::Constant(number("value", p[0])?))
            }
            "csv" => match rest {
                Some(path) if !path.is_empty() => Ok(InputSpec::Csv(PathBuf::from(path))),
                _ => Err(Error::Parse("input descriptor `csv` needs a path: csv:PATH".into())),
            },
            other => Err(Error::Parse(format!(
                "unknown input descriptor `{other}` (expected step, sine, sawtooth, const or csv)"
            ))),
        }
    }
}

impl InputSpec {
    /// `u(a), …, u(a+horizon)`. Every descriptor gives `u(a) = 0`.
    pub fn trace(&self, a: i64, horizon: usize) -> Result<SignalTrace> {
        let len = horizon + 1;
        match self {
            InputSpec::Step { switch } => SignalTrace::from_fn(a, len, |k| match k {
                k if k <= a => 0.0,
                k if k <= *switch => 1.0,
                _ => -1.0,
            }),
            InputSpec::Sine { amplitude, cycles } => SignalTrace::from_fn(a, len, |k| {
                if k <= a {
                    0.0
                } else {
                    amplitude * (cycles * std::f64::consts::PI * k as f64).sin()
                }
            }),
            InputSpec::Sawtooth { period, amplitude } => SignalTrace::from_fn(a, len, |k| {
                if k <= a {
                    0.0
                } else {
                    let phase = (k - a - 1).rem_euclid(*period as i64);
                    amplitude * phase as f64 / *period as f64
                }
            }),
            InputSpec::Constant(v) => SignalTrace::from_fn(a, len, |k| if k <= a { 0.0 } else { *v }),
            InputSpec::Csv(path) => read_csv_input(path, a, len),
        }
    }
}

fn read_csv_input(path: &PathBuf, a: i64, len: usize) -> Result<SignalTrace> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let ucol = find("u").ok_or_else(|| Error::Parse(format!("{}: input CSV needs a `u` column", path.display())))?;
    let kcol = find("k");
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        if let Some(kc) = kcol {
            let k: i64 = record[kc].trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "{}:{line}: k `{}` is not an integer",
                    path.display(),
                    &record[kc]
                ))
            })?;
            let expect = a + values.len() as i64;
            if k != expect {
                return Err(Error::Parse(format!(
                    "{}:{line}: expected k = {expect}, found {k}",
                    path.display()
                )));
            }
        }
        let u: f64 = record[ucol].trim().parse().map_err(|_| {
            Error::Parse(format!(
                "{}:{line}: u `{}` is not a number",
                path.display(),
                &record[ucol]
            ))
        })?;
        values.push(u);
    }
    if values.len() < len {
        return Err(Error::Parse(format!(
            "{}: {} input samples, the horizon needs {len}",
            path.display(),
            values.len()
        )));
    }
    values.truncate(len);
    SignalTrace::new(a, values)
}
