//! Cardinal comparison tests.
//!
//! A test maps a `t`-history to a propensity in `[0, 1]` that the first
//! forecaster is the better one; `0.5` is indifference. Evaluated on a
//! history of length `t`, a test returns what the literature writes as
//! `T_{t+1}`: the verdict announced after `t` completed periods. The empty
//! history gives `T_1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{Alphabet, Forecast};
use crate::history::{PlayEntry, PlayHistory, Prefix, RatioState};

pub trait ComparisonTest: Send + Sync + fmt::Debug {
    fn id(&self) -> String;

    /// Propensity in `[0, 1]` computed from the history alone.
    fn propensity(&self, history: Prefix<'_>) -> f64;
}

pub type Test = Arc<dyn ComparisonTest>;

/// `f(ω^t) / (f(ω^t) + g(ω^t))` in the stable form `1 / (1 + exp(log g - log f))`,
/// with `1/2` when both prefix probabilities vanish.
pub fn derivative_propensity(ratio: RatioState) -> f64 {
    if ratio.both_zero {
        return 0.5;
    }
    1.0 / (1.0 + ratio.log_ratio.exp())
}

/// The finite derivative test 𝒟.
#[derive(Debug, Clone, Copy, Default)]
pub struct FiniteDerivative;

impl ComparisonTest for FiniteDerivative {
    fn id(&self) -> String {
        "D".into()
    }

    fn propensity(&self, history: Prefix<'_>) -> f64 {
        derivative_propensity(history.ratio())
    }
}

/// The three-valued likelihood test: 0 if `g/f > 1`, 1 if `g/f < 1`, else 1/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct LikelihoodTest;

impl ComparisonTest for LikelihoodTest {
    fn id(&self) -> String {
        "L".into()
    }

    fn propensity(&self, history: Prefix<'_>) -> f64 {
        let r = history.ratio();
        if r.both_zero || r.log_ratio == 0.0 {
            0.5
        } else if r.log_ratio > 0.0 {
            0.0
        } else {
            1.0
        }
    }
}

/// Always 1/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantFair;

impl ComparisonTest for ConstantFair {
    fn id(&self) -> String {
        "fair".into()
    }

    fn propensity(&self, _: Prefix<'_>) -> f64 {
        0.5
    }
}

/// A designated infinite play path along which a counterexample test
/// deviates from 𝒟. Period `t` (1-based) of the path is `entry(t)`.
#[derive(Clone)]
pub struct TriggerPath {
    name: String,
    entry: Arc<dyn Fn(usize) -> PlayEntry + Send + Sync>,
}

impl fmt::Debug for TriggerPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TriggerPath").field("name", &self.name).finish()
    }
}

/// Where a history sits relative to a trigger path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerMatch {
    Forward,
    Mirrored,
    Neither,
}

impl TriggerPath {
    pub fn new(name: impl Into<String>, entry: impl Fn(usize) -> PlayEntry + Send + Sync + 'static) -> Self {
        TriggerPath {
            name: name.into(),
            entry: Arc::new(entry),
        }
    }

    /// `(ω̃, f̃, g̃)`: fair coin against the always-1 forecaster on the
    /// all-ones realization.
    pub fn fair_vs_always_one() -> Self {
        let a = Alphabet::BINARY;
        TriggerPath::new("h1", move |_| PlayEntry {
            outcome: 1,
            first: Forecast::uniform(a),
            second: Forecast::point(a, 1),
        })
    }

    /// On the all-ones realization: on day one the first forecaster assigns
    /// 1 to outcome 1 and the second assigns 1/2; from day two on both
    /// assign 1 to outcome 1.
    pub fn certain_vs_half_first_day() -> Self {
        let a = Alphabet::BINARY;
        TriggerPath::new("h2", move |t| PlayEntry {
            outcome: 1,
            first: Forecast::point(a, 1),
            second: if t == 1 {
                Forecast::uniform(a)
            } else {
                Forecast::point(a, 1)
            },
        })
    }

    pub fn entry(&self, period: usize) -> PlayEntry {
        (self.entry)(period)
    }

    /// Builds the first `t` periods of the forward path.
    pub fn history(&self, t: usize) -> PlayHistory {
        let entries = (1..=t).map(|p| self.entry(p)).collect();
        PlayHistory::from_entries(Alphabet::BINARY, entries).expect("trigger paths are binary")
    }

    /// Exact comparison of every stored value; an empty history matches
    /// neither direction.
    pub fn classify(&self, history: Prefix<'_>) -> TriggerMatch {
        if history.is_empty() {
            return TriggerMatch::Neither;
        }
        let mut forward = true;
        let mut mirrored = true;
        for (i, e) in history.entries().iter().enumerate() {
            let want = self.entry(i + 1);
            if e.outcome != want.outcome {
                return TriggerMatch::Neither;
            }
            forward &= e.first == want.first && e.second == want.second;
            mirrored &= e.first == want.second && e.second == want.first;
            if !forward && !mirrored {
                return TriggerMatch::Neither;
            }
        }
        if forward {
            TriggerMatch::Forward
        } else {
            TriggerMatch::Mirrored
        }
    }
}

/// 𝒟 except along a trigger path, where the likelihood ratio is scaled by
/// `c`: `1/(1 + c·D_f^t g)` on the forward path and `1 - 1/(1 + c·D_g^t f)`
/// on the mirrored one.
#[derive(Debug, Clone)]
pub struct ScaledDerivative {
    c: f64,
    trigger: TriggerPath,
}

impl ScaledDerivative {
    pub fn new(c: f64, trigger: TriggerPath) -> Result<Self> {
        if c.is_nan() || c <= 1.0 || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("scaling constant c = {c} must exceed 1")));
        }
        Ok(ScaledDerivative { c, trigger })
    }

    /// The constructive example: trigger on fair coin vs always-1.
    pub fn standard(c: f64) -> Result<Self> {
        ScaledDerivative::new(c, TriggerPath::fair_vs_always_one())
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl ComparisonTest for ScaledDerivative {
    fn id(&self) -> String {
        format!("Tc:{}", self.c)
    }

    fn propensity(&self, history: Prefix<'_>) -> f64 {
        let r = history.ratio();
        if r.both_zero {
            return 0.5;
        }
        let ln_c = self.c.ln();
        match self.trigger.classify(history) {
            TriggerMatch::Neither => derivative_propensity(r),
            // 1 / (1 + c·D_f^t g)
            TriggerMatch::Forward => 1.0 / (1.0 + (ln_c + r.log_ratio).exp()),
            // 1 - 1 / (1 + c·D_g^t f), with log D_g^t f = -log D_f^t g
            TriggerMatch::Mirrored => 1.0 - 1.0 / (1.0 + (ln_c - r.log_ratio).exp()),
        }
    }
}

/// 0 on the forward h₂ path, 1 on its mirror, 𝒟 elsewhere.
#[derive(Debug, Clone)]
pub struct H2Counterexample {
    trigger: TriggerPath,
}

impl H2Counterexample {
    pub fn new() -> Self {
        H2Counterexample {
            trigger: TriggerPath::certain_vs_half_first_day(),
        }
    }

    pub fn trigger(&self) -> &TriggerPath {
        &self.trigger
    }
}

impl Default for H2Counterexample {
    fn default() -> Self {
        H2Counterexample::new()
    }
}

impl ComparisonTest for H2Counterexample {
    fn id(&self) -> String {
        "h2".into()
    }

    fn propensity(&self, history: Prefix<'_>) -> f64 {
        match self.trigger.classify(history) {
            TriggerMatch::Forward => 0.0,
            TriggerMatch::Mirrored => 1.0,
            TriggerMatch::Neither => derivative_propensity(history.ratio()),
        }
    }
}

/// `|T(h) - (1 - T(swap h))|`; zero for an anonymous test.
pub fn anonymity_audit(test: &dyn ComparisonTest, history: &PlayHistory) -> f64 {
    let direct = test.propensity(history.as_prefix());
    let swapped = test.propensity(history.swapped().as_prefix());
    (direct - (1.0 - swapped)).abs()
}

/// Propensities `T_1..T_n` along a history of length `n` plus the verdict
/// after the final period and the final likelihood ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestTrajectory {
    pub propensities: Vec<f64>,
    pub terminal: f64,
    pub final_ratio: RatioState,
}

pub fn trajectory(test: &dyn ComparisonTest, history: &PlayHistory) -> TestTrajectory {
    let n = history.len();
    TestTrajectory {
        propensities: (0..n).map(|t| test.propensity(history.prefix(t))).collect(),
        terminal: test.propensity(history.as_prefix()),
        final_ratio: history.as_prefix().ratio(),
    }
}

pub const TEST_IDS: &[(&str, &str)] = &[
    ("D", "finite derivative test f/(f+g)"),
    ("L", "three-valued likelihood test"),
    ("fair", "constant 1/2"),
    ("Tc:c", "derivative test with the ratio scaled by c along the fair-vs-always-1 path"),
    ("h2", "counterexample test that is reasonable but not error-free"),
];

pub fn parse_test(id: &str) -> Result<Test> {
    let test: Test = match id.split_once(':') {
        None => match id {
            "D" => Arc::new(FiniteDerivative),
            "L" => Arc::new(LikelihoodTest),
            "fair" => Arc::new(ConstantFair),
            "h2" => Arc::new(H2Counterexample::new()),
            _ => return Err(Error::UnknownTest(id.into())),
        },
        Some(("Tc", c)) => {
            let c: f64 = c.parse().map_err(|_| Error::UnknownTest(id.into()))?;
            Arc::new(ScaledDerivative::standard(c)?)
        }
        Some(_) => return Err(Error::UnknownTest(id.into())),
    };
    Ok(test)
}
