//! Play histories: the interleaved record of outcomes and both forecasts.
//!
//! A history stores, next to its entries, the running log prefix
//! probabilities `log f(ω^t)` and `log g(ω^t)` for every `t`, so any prefix
//! can be viewed in O(1) through [`Prefix`]. Probabilities stay in log space;
//! `-inf` encodes probability zero exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{Alphabet, Forecast, OutcomePrefix};
use crate::strategy::ForecastingStrategy;

/// Which of the two forecasters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seat {
    First,
    Second,
}

impl Seat {
    pub fn other(self) -> Seat {
        match self {
            Seat::First => Seat::Second,
            Seat::Second => Seat::First,
        }
    }

    fn index(self) -> usize {
        match self {
            Seat::First => 0,
            Seat::Second => 1,
        }
    }
}

/// One period: the realized outcome and the forecasts both experts announced
/// before it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayEntry {
    pub outcome: usize,
    pub first: Forecast,
    pub second: Forecast,
}

impl PlayEntry {
    pub fn forecast(&self, seat: Seat) -> &Forecast {
        match seat {
            Seat::First => &self.first,
            Seat::Second => &self.second,
        }
    }
}

/// Log of a prefix probability, in `[-inf, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogPrefixProb(pub f64);

impl LogPrefixProb {
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// A play history `(ω, f⃗)^t`.
///
/// Histories are extended only through [`PlayHistory::step_pair`] (or the
/// in-place [`PlayHistory::push_step`] used by samplers), which computes
/// both forecasts from the current history before appending the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayHistory {
    alphabet: Alphabet,
    entries: Vec<PlayEntry>,
    // log_probs[t] = [log f(ω^t), log g(ω^t)]; log_probs[0] = [0, 0].
    log_probs: Vec<[f64; 2]>,
}

impl PlayHistory {
    pub fn new(alphabet: Alphabet) -> Self {
        PlayHistory {
            alphabet,
            entries: Vec::new(),
            log_probs: vec![[0.0, 0.0]],
        }
    }

    /// Builds a history by replaying `outcomes` against the pair.
    pub fn replay(
        alphabet: Alphabet,
        f: &dyn ForecastingStrategy,
        g: &dyn ForecastingStrategy,
        outcomes: &[usize],
    ) -> Result<Self> {
        let mut h = PlayHistory::with_capacity(alphabet, outcomes.len());
        for &o in outcomes {
            h.push_step(f, g, o)?;
        }
        Ok(h)
    }

    /// Builds a history directly from recorded entries. The caller vouches
    /// that each entry's forecasts came from the preceding entries.
    pub fn from_entries(alphabet: Alphabet, entries: Vec<PlayEntry>) -> Result<Self> {
        let mut h = PlayHistory::with_capacity(alphabet, entries.len());
        for e in entries {
            h.push_entry(e)?;
        }
        Ok(h)
    }

    pub fn with_capacity(alphabet: Alphabet, horizon: usize) -> Self {
        let mut log_probs = Vec::with_capacity(horizon + 1);
        log_probs.push([0.0, 0.0]);
        PlayHistory {
            alphabet,
            entries: Vec::with_capacity(horizon),
            log_probs,
        }
    }

    /// Returns the history extended by one period: both forecasts are
    /// computed on `self` and then `outcome` is appended.
    pub fn step_pair(
        &self,
        f: &dyn ForecastingStrategy,
        g: &dyn ForecastingStrategy,
        outcome: usize,
    ) -> Result<PlayHistory> {
        let mut next = self.clone();
        next.push_step(f, g, outcome)?;
        Ok(next)
    }

    /// In-place form of [`step_pair`](Self::step_pair).
    pub fn push_step(
        &mut self,
        f: &dyn ForecastingStrategy,
        g: &dyn ForecastingStrategy,
        outcome: usize,
    ) -> Result<()> {
        self.alphabet.check(outcome)?;
        let (first, second) = self.forecasts(f, g);
        self.push_entry(PlayEntry {
            outcome,
            first,
            second,
        })
    }

    /// Forecasts both experts announce at the current history.
    pub fn forecasts(&self, f: &dyn ForecastingStrategy, g: &dyn ForecastingStrategy) -> (Forecast, Forecast) {
        let view = self.prefix(self.len());
        (f.forecast(view, Seat::First), g.forecast(view, Seat::Second))
    }

    pub(crate) fn push_entry(&mut self, entry: PlayEntry) -> Result<()> {
        self.alphabet.check(entry.outcome)?;
        let size = self.alphabet.size();
        if entry.first.len() != size || entry.second.len() != size {
            return Err(Error::InvalidForecast(format!(
                "forecast lengths ({}, {}) do not match alphabet size {size}",
                entry.first.len(),
                entry.second.len()
            )));
        }
        let last = *self.log_probs.last().expect("log_probs is never empty");
        let o = entry.outcome;
        let next = [
            last[0] + entry.first.prob(o).ln(),
            last[1] + entry.second.prob(o).ln(),
        ];
        self.entries.push(entry);
        self.log_probs.push(next);
        Ok(())
    }

    pub(crate) fn pop(&mut self) -> Option<PlayEntry> {
        let e = self.entries.pop()?;
        self.log_probs.pop();
        Some(e)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PlayEntry] {
        &self.entries
    }

    pub fn outcomes(&self) -> OutcomePrefix {
        self.entries.iter().map(|e| e.outcome).collect::<Vec<_>>().into()
    }

    /// `log f(ω^t)` (first) or `log g(ω^t)` (second) at the full length.
    pub fn log_prefix_prob(&self, which: Seat) -> LogPrefixProb {
        self.prefix(self.len()).log_prob(which)
    }

    /// View of the first `t` periods.
    pub fn prefix(&self, t: usize) -> Prefix<'_> {
        assert!(t <= self.len(), "prefix {t} beyond history length {}", self.len());
        Prefix {
            alphabet: self.alphabet,
            entries: &self.entries[..t],
            log_probs: &self.log_probs[..=t],
        }
    }

    pub fn as_prefix(&self) -> Prefix<'_> {
        self.prefix(self.len())
    }

    /// The same play with the two forecasters' roles exchanged.
    pub fn swapped(&self) -> PlayHistory {
        PlayHistory {
            alphabet: self.alphabet,
            entries: self
                .entries
                .iter()
                .map(|e| PlayEntry {
                    outcome: e.outcome,
                    first: e.second.clone(),
                    second: e.first.clone(),
                })
                .collect(),
            log_probs: self.log_probs.iter().map(|&[a, b]| [b, a]).collect(),
        }
    }
}

/// A sampled play path. Same representation as a history.
pub type PlayPath = PlayHistory;

/// Borrowed view of a history prefix `(ω, f⃗)^t`.
#[derive(Debug, Clone, Copy)]
pub struct Prefix<'a> {
    alphabet: Alphabet,
    entries: &'a [PlayEntry],
    log_probs: &'a [[f64; 2]],
}

impl<'a> Prefix<'a> {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Number of completed periods `t`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &'a [PlayEntry] {
        self.entries
    }

    pub fn outcomes(&self) -> impl Iterator<Item = usize> + 'a {
        self.entries.iter().map(|e| e.outcome)
    }

    pub fn log_prob(&self, which: Seat) -> LogPrefixProb {
        LogPrefixProb(self.log_probs[self.entries.len()][which.index()])
    }

    /// Log prefix probabilities at an earlier time `s <= len()`.
    pub fn log_probs_at(&self, s: usize) -> [f64; 2] {
        self.log_probs[s]
    }

    pub fn ratio(&self) -> RatioState {
        RatioState::from_logs(self.log_prob(Seat::First).0, self.log_prob(Seat::Second).0)
    }

    pub fn truncate(&self, t: usize) -> Prefix<'a> {
        assert!(t <= self.len());
        Prefix {
            alphabet: self.alphabet,
            entries: &self.entries[..t],
            log_probs: &self.log_probs[..=t],
        }
    }
}

/// The likelihood ratio `D_f^t g = g(ω^t) / f(ω^t)` in log form.
///
/// `log_ratio` is `+inf` iff `f(ω^t) = 0 < g(ω^t)` and `-inf` iff
/// `g(ω^t) = 0 < f(ω^t)`. When both vanish, `both_zero` is set and
/// `log_ratio` is NaN and must not be used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioState {
    pub log_ratio: f64,
    pub both_zero: bool,
}

impl RatioState {
    pub fn from_logs(log_f: f64, log_g: f64) -> Self {
        let f_zero = log_f == f64::NEG_INFINITY;
        let g_zero = log_g == f64::NEG_INFINITY;
        match (f_zero, g_zero) {
            (true, true) => RatioState {
                log_ratio: f64::NAN,
                both_zero: true,
            },
            (true, false) => RatioState {
                log_ratio: f64::INFINITY,
                both_zero: false,
            },
            (false, true) => RatioState {
                log_ratio: f64::NEG_INFINITY,
                both_zero: false,
            },
            (false, false) => RatioState {
                log_ratio: log_g - log_f,
                both_zero: false,
            },
        }
    }

    /// `D_f^t g` in linear scale (`inf` when f's prefix probability is 0).
    pub fn ratio(&self) -> Option<f64> {
        if self.both_zero {
            None
        } else {
            Some(self.log_ratio.exp())
        }
    }
}
