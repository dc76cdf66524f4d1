//! Deterministic forecasting strategies and their string registry.
//!
//! A strategy maps a play history (outcomes plus both experts' past
//! forecasts) to a distribution over the next outcome. It is told which
//! seat it occupies so it can tell its own past forecasts from its
//! opponent's.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forecast::{Alphabet, Forecast, OutcomePrefix};
use crate::history::{Prefix, Seat};

/// Consistency tolerance for measure tables.
pub const MEASURE_TOL: f64 = 1e-9;

pub trait ForecastingStrategy: Send + Sync + fmt::Debug {
    /// Registry-style identifier.
    fn id(&self) -> String;

    fn alphabet(&self) -> Alphabet;

    /// Forecast for the next period. Must be a pure function of its inputs.
    fn forecast(&self, history: Prefix<'_>, seat: Seat) -> Forecast;
}

pub type Strategy = Arc<dyn ForecastingStrategy>;

/// Uniform forecast every period.
#[derive(Debug, Clone)]
pub struct Fair {
    alphabet: Alphabet,
}

impl Fair {
    pub fn new(alphabet: Alphabet) -> Self {
        Fair { alphabet }
    }
}

impl ForecastingStrategy for Fair {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn id(&self) -> String {
        "fair".into()
    }

    fn forecast(&self, _: Prefix<'_>, _: Seat) -> Forecast {
        Forecast::uniform(self.alphabet)
    }
}

/// Binary iid forecast: probability `p` on outcome 1 every period.
#[derive(Debug, Clone)]
pub struct Iid {
    p: f64,
    forecast: Forecast,
}

impl Iid {
    pub fn new(p: f64) -> Result<Self> {
        Ok(Iid {
            p,
            forecast: Forecast::binary(p)?,
        })
    }
}

impl ForecastingStrategy for Iid {
    fn alphabet(&self) -> Alphabet {
        Alphabet::BINARY
    }

    fn id(&self) -> String {
        format!("iid:{}", self.p)
    }

    fn forecast(&self, _: Prefix<'_>, _: Seat) -> Forecast {
        self.forecast.clone()
    }
}

/// Deterministic forecaster: puts all mass on `sequence[t mod len]` at
/// period `t + 1`. `delta:1` is the "always 1" forecaster.
#[derive(Debug, Clone)]
pub struct Delta {
    alphabet: Alphabet,
    sequence: Vec<usize>,
}

impl Delta {
    pub fn new(alphabet: Alphabet, sequence: Vec<usize>) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::InvalidParameter("delta sequence is empty".into()));
        }
        for &o in &sequence {
            alphabet.check(o)?;
        }
        Ok(Delta { alphabet, sequence })
    }

    pub fn always(alphabet: Alphabet, outcome: usize) -> Result<Self> {
        Delta::new(alphabet, vec![outcome])
    }
}

impl ForecastingStrategy for Delta {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn id(&self) -> String {
        format!("delta:{}", OutcomePrefix::from(self.sequence.clone()))
    }

    fn forecast(&self, history: Prefix<'_>, _: Seat) -> Forecast {
        let next = self.sequence[history.len() % self.sequence.len()];
        Forecast::point(self.alphabet, next)
    }
}

/// Uniform for the first `k` periods, then repeats the opponent's most
/// recent announced forecast.
#[derive(Debug, Clone)]
pub struct CopycatAfter {
    alphabet: Alphabet,
    k: usize,
}

impl CopycatAfter {
    pub fn new(alphabet: Alphabet, k: usize) -> Self {
        CopycatAfter { alphabet, k }
    }
}

impl ForecastingStrategy for CopycatAfter {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn id(&self) -> String {
        format!("copycat-after:{}", self.k)
    }

    fn forecast(&self, history: Prefix<'_>, seat: Seat) -> Forecast {
        let t = history.len();
        if t < self.k || t == 0 {
            return Forecast::uniform(self.alphabet);
        }
        history.entries()[t - 1].forecast(seat.other()).clone()
    }
}

/// Plays a fixed script of forecasts for the first periods, then defers to
/// another strategy.
#[derive(Debug, Clone)]
pub struct Scripted {
    script: Vec<Forecast>,
    then: Strategy,
}

impl Scripted {
    pub fn new(script: Vec<Forecast>, then: Strategy) -> Self {
        Scripted { script, then }
    }
}

impl ForecastingStrategy for Scripted {
    fn alphabet(&self) -> Alphabet {
        self.then.alphabet()
    }

    fn id(&self) -> String {
        let head: Vec<String> = self
            .script
            .iter()
            .map(|f| {
                let parts: Vec<String> = f.probs().iter().map(|p| p.to_string()).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        format!("scripted[{}]/{}", head.join(";"), self.then.id())
    }

    fn forecast(&self, history: Prefix<'_>, seat: Seat) -> Forecast {
        match self.script.get(history.len()) {
            Some(f) => f.clone(),
            None => self.then.forecast(history, seat),
        }
    }
}

/// Wraps a closure as a strategy. Used for constructed fixtures.
#[derive(Clone)]
pub struct FnStrategy {
    id: String,
    alphabet: Alphabet,
    func: Arc<dyn Fn(Prefix<'_>, Seat) -> Forecast + Send + Sync>,
}

impl FnStrategy {
    pub fn new(
        id: impl Into<String>,
        alphabet: Alphabet,
        func: impl Fn(Prefix<'_>, Seat) -> Forecast + Send + Sync + 'static,
    ) -> Self {
        FnStrategy {
            id: id.into(),
            alphabet,
            func: Arc::new(func),
        }
    }
}

impl fmt::Debug for FnStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnStrategy").field("id", &self.id).finish()
    }
}

impl ForecastingStrategy for FnStrategy {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn id(&self) -> String {
        self.id.clone()
    }

    fn forecast(&self, history: Prefix<'_>, seat: Seat) -> Forecast {
        (self.func)(history, seat)
    }
}

/// Pseudo-random but deterministic forecasts: a hash of the seed and the
/// realized outcomes picks a full-support distribution.
#[derive(Debug, Clone)]
pub struct SeededRandom {
    alphabet: Alphabet,
    seed: u64,
}

impl SeededRandom {
    pub fn new(alphabet: Alphabet, seed: u64) -> Self {
        SeededRandom { alphabet, seed }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl ForecastingStrategy for SeededRandom {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn id(&self) -> String {
        format!("seeded-random:{}", self.seed)
    }

    fn forecast(&self, history: Prefix<'_>, _: Seat) -> Forecast {
        let mut h = splitmix64(self.seed);
        for o in history.outcomes() {
            h = splitmix64(h ^ (o as u64 + 1));
        }
        h = splitmix64(h ^ (history.len() as u64).rotate_left(32));
        let weights: Vec<f64> = self
            .alphabet
            .outcomes()
            .map(|x| {
                let u = splitmix64(h.wrapping_add(x as u64)) >> 11;
                0.05 + 0.95 * (u as f64 / (1u64 << 53) as f64)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        Forecast::from_raw(weights.into_iter().map(|w| w / total).collect())
    }
}

/// The forecaster `f_P` induced by a measure given on cylinders: forecasts
/// `P(ω_{t+1} | ω^t)` and ignores the forecast components of the history.
///
/// A node's conditional is defined when the node has positive mass and its
/// listed children sum to it (unlisted children then carry zero mass).
/// Elsewhere the fallback forecast is returned.
#[derive(Debug, Clone)]
pub struct BayesStrategy {
    alphabet: Alphabet,
    conditionals: HashMap<Vec<usize>, Forecast>,
    max_len: usize,
    fallback: Forecast,
}

impl BayesStrategy {
    pub fn new(alphabet: Alphabet, table: &HashMap<OutcomePrefix, f64>, fallback: Forecast) -> Result<Self> {
        if fallback.len() != alphabet.size() {
            return Err(Error::InvalidForecast("fallback does not match alphabet".into()));
        }
        for (prefix, &p) in table {
            if !(0.0..=1.0 + MEASURE_TOL).contains(&p) {
                return Err(Error::InvalidMeasure(format!("P({prefix}) = {p} outside [0, 1]")));
            }
            for &o in prefix.as_slice() {
                alphabet.check(o)?;
            }
        }
        let mass = |p: &OutcomePrefix| -> Option<f64> {
            table.get(p).copied().or(if p.is_empty() { Some(1.0) } else { None })
        };

        // Every node that has a listed child is a candidate parent.
        let mut parents: Vec<OutcomePrefix> = table.keys().filter_map(|p| p.parent()).collect();
        parents.sort();
        parents.dedup();

        let mut conditionals = HashMap::new();
        for parent in parents {
            let children: Vec<Option<f64>> = alphabet.outcomes().map(|x| table.get(&parent.child(x)).copied()).collect();
            let listed: f64 = children.iter().flatten().sum();
            let Some(pm) = mass(&parent) else { continue };
            if listed > pm + MEASURE_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "children of {parent} sum to {listed}, exceeding P({parent}) = {pm}"
                )));
            }
            if pm <= 0.0 || (listed - pm).abs() > MEASURE_TOL || listed <= 0.0 {
                continue;
            }
            let probs = children.iter().map(|c| c.unwrap_or(0.0) / listed).collect();
            conditionals.insert(parent.as_slice().to_vec(), Forecast::from_raw(probs));
        }
        let max_len = conditionals.keys().map(Vec::len).max().unwrap_or(0);
        Ok(BayesStrategy {
            alphabet,
            conditionals,
            max_len,
            fallback,
        })
    }

    /// Reads a JSON object mapping digit-string prefixes to probabilities,
    /// e.g. `{"": 1, "0": 0.5, "1": 0.5}`. The empty key is the root.
    pub fn from_json_file(alphabet: Alphabet, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: HashMap<String, f64> = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidMeasure(format!("{}: {e}", path.display())))?;
        let mut table = HashMap::with_capacity(raw.len());
        for (k, v) in raw {
            table.insert(OutcomePrefix::parse_digits(&k, alphabet)?, v);
        }
        BayesStrategy::new(alphabet, &table, Forecast::uniform(alphabet))
    }
}

impl ForecastingStrategy for BayesStrategy {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn id(&self) -> String {
        "table".into()
    }

    fn forecast(&self, history: Prefix<'_>, _: Seat) -> Forecast {
        if history.len() > self.max_len {
            return self.fallback.clone();
        }
        let key: Vec<usize> = history.outcomes().collect();
        self.conditionals.get(&key).cloned().unwrap_or_else(|| self.fallback.clone())
    }
}

/// Builds the strategy for a bare measure table.
pub fn bayes_strategy(
    alphabet: Alphabet,
    measure_table: &HashMap<OutcomePrefix, f64>,
    fallback: Option<Forecast>,
) -> Result<Strategy> {
    let fallback = fallback.unwrap_or_else(|| Forecast::uniform(alphabet));
    Ok(Arc::new(BayesStrategy::new(alphabet, measure_table, fallback)?))
}

/// Registry ids accepted by [`parse_strategy`].
pub const STRATEGY_IDS: &[(&str, &str)] = &[
    ("fair", "uniform forecast every period"),
    ("iid:p", "binary iid forecast with probability p on outcome 1"),
    ("delta:sequence", "all mass on the digits of `sequence`, cycled"),
    ("copycat-after:k", "uniform for k periods, then repeats the opponent's last forecast"),
    ("table:path", "Bayes forecaster of a JSON measure table"),
    ("seeded-random:seed", "deterministic hash-driven full-support forecasts"),
];

/// Resolves a registry id such as `iid:0.9` or `delta:10`.
pub fn parse_strategy(id: &str, alphabet: Alphabet) -> Result<Strategy> {
    let (name, arg) = match id.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (id, None),
    };
    let bad = || Error::UnknownStrategy(id.to_string());
    let strategy: Strategy = match (name, arg) {
        ("fair", None) => Arc::new(Fair::new(alphabet)),
        ("iid", Some(p)) => {
            if alphabet.size() != 2 {
                return Err(Error::InvalidParameter(format!("`{id}` needs a binary alphabet")));
            }
            let p: f64 = p.parse().map_err(|_| bad())?;
            Arc::new(Iid::new(p)?)
        }
        ("delta", Some(seq)) => {
            let seq = OutcomePrefix::parse_digits(seq, alphabet)?;
            Arc::new(Delta::new(alphabet, seq.as_slice().to_vec())?)
        }
        ("copycat-after", Some(k)) => Arc::new(CopycatAfter::new(alphabet, k.parse().map_err(|_| bad())?)),
        ("table", Some(path)) => Arc::new(BayesStrategy::from_json_file(alphabet, Path::new(path))?),
        ("seeded-random", Some(seed)) => Arc::new(SeededRandom::new(alphabet, seed.parse().map_err(|_| bad())?)),
        _ => return Err(bad()),
    };
    Ok(strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::PlayHistory;

    fn binary() -> Alphabet {
        Alphabet::BINARY
    }

    #[test]
    fn registry_resolves_every_builtin() {
        for id in ["fair", "iid:0.3", "delta:10", "copycat-after:2", "seeded-random:9"] {
            let s = parse_strategy(id, binary()).unwrap();
            assert_eq!(s.id(), id);
        }
        assert!(matches!(parse_strategy("nope", binary()), Err(Error::UnknownStrategy(_))));
        assert!(matches!(parse_strategy("iid:x", binary()), Err(Error::UnknownStrategy(_))));
        assert!(parse_strategy("iid:1.5", binary()).is_err());
        assert!(parse_strategy("delta:12", binary()).is_err());
    }

    #[test]
    fn delta_cycles_its_sequence() {
        let f = parse_strategy("delta:10", binary()).unwrap();
        let g = parse_strategy("fair", binary()).unwrap();
        let h = PlayHistory::replay(binary(), &*f, &*g, &[1, 0, 1]).unwrap();
        let got: Vec<f64> = h.entries().iter().map(|e| e.first.prob(1)).collect();
        assert_eq!(got, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn copycat_repeats_opponent_after_k() {
        let f = parse_strategy("copycat-after:2", binary()).unwrap();
        let g = parse_strategy("iid:0.9", binary()).unwrap();
        let h = PlayHistory::replay(binary(), &*f, &*g, &[1, 1, 0, 1]).unwrap();
        let got: Vec<f64> = h.entries().iter().map(|e| e.first.prob(1)).collect();
        assert_eq!(got, vec![0.5, 0.5, 0.9, 0.9]);
    }

    #[test]
    fn iid_table_gives_constant_forecast() {
        let p = 0.3;
        let mut table = HashMap::new();
        table.insert(OutcomePrefix::empty(), 1.0);
        let mut frontier = vec![OutcomePrefix::empty()];
        for _ in 0..3 {
            let mut next = Vec::new();
            for node in frontier {
                let m = table[&node];
                table.insert(node.child(0), m * (1.0 - p));
                table.insert(node.child(1), m * p);
                next.push(node.child(0));
                next.push(node.child(1));
            }
            frontier = next;
        }
        let s = bayes_strategy(binary(), &table, None).unwrap();
        let fair = Fair::new(binary());
        let h = PlayHistory::replay(binary(), &*s, &fair, &[0, 1, 1]).unwrap();
        for e in h.entries() {
            assert!((e.first.prob(1) - p).abs() < 1e-15);
        }
        // beyond the table depth the fallback (uniform) applies
        assert_eq!(h.as_prefix().len(), 3);
        assert_eq!(s.forecast(h.as_prefix(), Seat::First).probs(), &[0.5, 0.5]);
    }

    #[test]
    fn deterministic_table_conditions_on_support() {
        // "always 1, 0, 1, 0, ..." listed on its support only
        let table: HashMap<OutcomePrefix, f64> = [("", 1.0), ("1", 1.0), ("10", 1.0), ("101", 1.0)]
            .into_iter()
            .map(|(k, v)| (OutcomePrefix::parse_digits(k, binary()).unwrap(), v))
            .collect();
        let s = bayes_strategy(binary(), &table, None).unwrap();
        let fair = Fair::new(binary());
        let h = PlayHistory::replay(binary(), &*s, &fair, &[1]).unwrap();
        assert_eq!(s.forecast(h.as_prefix(), Seat::First).probs(), &[1.0, 0.0]);
        // a zero-mass prefix gets the fallback
        let h0 = PlayHistory::replay(binary(), &*s, &fair, &[0]).unwrap();
        assert_eq!(s.forecast(h0.as_prefix(), Seat::First).probs(), &[0.5, 0.5]);
    }

    #[test]
    fn custom_fallback_is_used_off_support() {
        let table: HashMap<OutcomePrefix, f64> = [(OutcomePrefix::from(vec![1]), 1.0)].into_iter().collect();
        let fb = Forecast::binary(0.2).unwrap();
        let s = bayes_strategy(binary(), &table, Some(fb.clone())).unwrap();
        let fair = Fair::new(binary());
        let h = PlayHistory::replay(binary(), &*s, &fair, &[0]).unwrap();
        assert_eq!(s.forecast(h.as_prefix(), Seat::First), fb);
    }

    #[test]
    fn inconsistent_table_is_rejected() {
        let table: HashMap<OutcomePrefix, f64> = [("", 1.0), ("0", 0.7), ("1", 0.7)]
            .into_iter()
            .map(|(k, v)| (OutcomePrefix::parse_digits(k, binary()).unwrap(), v))
            .collect();
        assert!(matches!(bayes_strategy(binary(), &table, None), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn table_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"": 1.0, "0": 0.25, "1": 0.75}"#).unwrap();
        let s = parse_strategy(&format!("table:{}", path.display()), binary()).unwrap();
        let h = PlayHistory::new(binary());
        assert_eq!(s.forecast(h.as_prefix(), Seat::First).probs(), &[0.25, 0.75]);
    }

    #[test]
    fn seeded_random_is_deterministic_and_normalized() {
        let s = SeededRandom::new(Alphabet::new(3).unwrap(), 42);
        let fair = Fair::new(Alphabet::new(3).unwrap());
        let h = PlayHistory::replay(Alphabet::new(3).unwrap(), &s, &fair, &[2, 0, 1]).unwrap();
        let a = s.forecast(h.as_prefix(), Seat::First);
        let b = s.forecast(h.as_prefix(), Seat::First);
        assert_eq!(a.probs(), b.probs());
        assert!((a.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(a.probs().iter().all(|&p| p > 0.0));
    }
}
