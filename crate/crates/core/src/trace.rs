//! Discrete-time signals anchored at an initial instant.

use crate::error::{Error, Result};

/// A real sequence `f(a), f(a+1), …, f(a+M)`.
///
/// Index 0 always stores `f(a)`. Reads outside `[a, a+M]` are errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    a: i64,
    values: Vec<f64>,
}

impl SignalTrace {
    pub fn new(a: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Length {
                needed: 1,
                available: 0,
            });
        }
        Ok(SignalTrace { a, values })
    }

    /// Samples `f(a+1), …` with `f(a)` set to `at_a`.
    pub fn from_tail(a: i64, at_a: f64, tail: &[f64]) -> Self {
        let mut values = Vec::with_capacity(tail.len() + 1);
        values.push(at_a);
        values.extend_from_slice(tail);
        SignalTrace { a, values }
    }

    /// Tabulates `f` on `a..=a+len-1`.
    pub fn from_fn(a: i64, len: usize, f: impl Fn(i64) -> f64) -> Result<Self> {
        Self::new(a, (0..len as i64).map(|m| f(a + m)).collect())
    }

    pub fn zeros(a: i64, len: usize) -> Result<Self> {
        Self::new(a, vec![0.0; len])
    }

    pub fn initial_instant(&self) -> i64 {
        self.a
    }

    /// Last instant with a sample.
    pub fn last_instant(&self) -> i64 {
        self.a + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Samples from `a+1` onward.
    pub fn tail(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, k: i64) -> Result<f64> {
        let m = k - self.a;
        if m < 0 || m as usize >= self.values.len() {
            return Err(Error::OutOfRange {
                index: k,
                first: self.a,
                last: self.last_instant(),
            });
        }
        Ok(self.values[m as usize])
    }

    /// `(k, f(k))` pairs in order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(m, &v)| (self.a + m as i64, v))
    }

    pub(crate) fn require_len(&self, needed: usize) -> Result<()> {
        if self.values.len() < needed {
            return Err(Error::Length {
                needed,
                available: self.values.len(),
            });
        }
        Ok(())
    }
}
