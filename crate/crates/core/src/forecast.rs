//! Outcomes, prefixes and one-step forecasts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a forecast.
pub const FORECAST_SUM_TOL: f64 = 1e-12;

/// A finite outcome set `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet { size: 2 };

    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidAlphabet(size));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check(&self, outcome: usize) -> Result<()> {
        if outcome < self.size {
            Ok(())
        } else {
            Err(Error::InvalidOutcome {
                outcome,
                size: self.size,
            })
        }
    }

    pub fn outcomes(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::BINARY
    }
}

/// A finite outcome sequence `ω^t`. Also names the cylinder of all its
/// infinite extensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct OutcomePrefix(Vec<usize>);

impl OutcomePrefix {
    pub fn empty() -> Self {
        OutcomePrefix(Vec::new())
    }

    pub fn new(outcomes: Vec<usize>, alphabet: Alphabet) -> Result<Self> {
        for &o in &outcomes {
            alphabet.check(o)?;
        }
        Ok(OutcomePrefix(outcomes))
    }

    /// Parses a digit string such as `"1101"`. Only alphabets of at most ten
    /// outcomes have a digit encoding.
    pub fn parse_digits(s: &str, alphabet: Alphabet) -> Result<Self> {
        let outcomes = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::InvalidParameter(format!("non-digit outcome `{c}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        OutcomePrefix::new(outcomes, alphabet)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn child(&self, outcome: usize) -> Self {
        let mut v = self.0.clone();
        v.push(outcome);
        OutcomePrefix(v)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(OutcomePrefix(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// True when `other` lies in the cylinder named by `self`.
    pub fn is_prefix_of(&self, other: &[usize]) -> bool {
        other.len() >= self.0.len() && other[..self.0.len()] == self.0[..]
    }
}

impl From<Vec<usize>> for OutcomePrefix {
    fn from(v: Vec<usize>) -> Self {
        OutcomePrefix(v)
    }
}

impl fmt::Display for OutcomePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        if self.0.iter().all(|&o| o < 10) {
            for o in &self.0 {
                write!(f, "{o}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|o| o.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// A probability distribution over the alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast(Vec<f64>);

impl Forecast {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidForecast(format!(
                "need at least two outcomes, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidForecast(format!("entry {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > FORECAST_SUM_TOL {
            return Err(Error::InvalidForecast(format!("entries sum to {total}")));
        }
        Ok(Forecast(probs))
    }

    /// Skips validation; callers construct normalized vectors.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        Forecast(probs)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Forecast(vec![1.0 / n as f64; n])
    }

    /// All mass on one outcome.
    pub fn point(alphabet: Alphabet, outcome: usize) -> Self {
        let mut v = vec![0.0; alphabet.size()];
        v[outcome] = 1.0;
        Forecast(v)
    }

    /// Binary forecast assigning probability `p` to outcome 1.
    pub fn binary(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Forecast(vec![1.0 - p, p]))
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.0[outcome]
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
