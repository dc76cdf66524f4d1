use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::BoundaryRule;
use crate::comparison::parse_test;
use crate::error::{Error, Result};
use crate::forecast::Alphabet;
use crate::history::Seat;
use crate::strategy::{parse_strategy, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Axioms,
    LError,
    EstimateK,
    Dichotomy,
    IdealDemo,
    CrossCalib,
    Trajectory,
    Equivalence,
    Martingale,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Axioms => "axioms",
            ExperimentKind::LError => "l-error",
            ExperimentKind::EstimateK => "estimate-k",
            ExperimentKind::Dichotomy => "dichotomy",
            ExperimentKind::IdealDemo => "ideal-demo",
            ExperimentKind::CrossCalib => "cross-calib",
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::Equivalence => "equivalence",
            ExperimentKind::Martingale => "martingale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomMode {
    #[default]
    Exact,
    MonteCarlo,
}

/// One experiment. Only `kind` and `seed` are always required; each kind
/// documents the fields it reads. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub name: Option<String>,
    /// Outcome alphabet size (default 2).
    pub alphabet: Option<usize>,
    /// Strategy pairs `[first, second]`.
    pub pairs: Option<Vec<[String; 2]>>,
    pub tests: Option<Vec<String>>,
    pub horizon: Option<usize>,
    pub eps: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub mode: Option<AxiomMode>,
    /// Which forecaster Nature follows (`first` by default).
    pub truth_seat: Option<TruthSeat>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub k_trials: Option<u64>,
    pub k_horizon: Option<usize>,
    pub stability_seeds: Option<Vec<u64>>,
    pub a_f: Option<f64>,
    pub a_g: Option<f64>,
    pub delta: Option<f64>,
    pub truth: Option<String>,
    pub experts: Option<Vec<String>>,
    pub grid: Option<usize>,
    pub m_min: Option<u64>,
    pub boundary: Option<BoundaryRule>,
    /// Outcome digits for a fixed trajectory path.
    pub path: Option<String>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthSeat {
    First,
    Second,
}

impl From<TruthSeat> for Seat {
    fn from(t: TruthSeat) -> Seat {
        match t {
            TruthSeat::First => Seat::First,
            TruthSeat::Second => Seat::Second,
        }
    }
}

fn missing(kind: ExperimentKind, field: &str) -> Error {
    Error::Config(format!("kind `{}` requires `{field}`", kind.as_str()))
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the config's canonical JSON (sorted keys).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.kind.ok_or_else(|| Error::Config("missing `kind`".into()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("missing `seed`".into()))
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.alphabet.unwrap_or(2))
    }

    pub(crate) fn req<T: Clone>(&self, v: &Option<T>, field: &str) -> Result<T> {
        v.clone().ok_or_else(|| missing(self.kind.unwrap_or(ExperimentKind::Axioms), field))
    }

    pub fn strategy_pairs(&self) -> Result<Vec<(Strategy, Strategy)>> {
        let a = self.alphabet()?;
        let pairs = self.req(&self.pairs, "pairs")?;
        if pairs.is_empty() {
            return Err(Error::Config("`pairs` is empty".into()));
        }
        pairs
            .iter()
            .map(|[f, g]| Ok((parse_strategy(f, a)?, parse_strategy(g, a)?)))
            .collect()
    }

    pub fn test_ids(&self) -> Vec<String> {
        self.tests.clone().unwrap_or_else(|| vec!["D".into()])
    }

    pub fn truth_seat(&self) -> Seat {
        self.truth_seat.unwrap_or(TruthSeat::First).into()
    }

    /// Resolves every registry id and checks the fields the kind needs.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        self.seed()?;
        let a = self.alphabet()?;
        for t in self.test_ids() {
            parse_test(&t)?;
        }
        if self.pairs.is_some() {
            self.strategy_pairs()?;
        }
        if let Some(t) = &self.truth {
            parse_strategy(t, a)?;
        }
        for e in self.experts.iter().flatten() {
            parse_strategy(e, a)?;
        }
        let prob = |v: Option<f64>, name: &str| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0 && x < 1.0) => Err(Error::Config(format!("`{name}` = {x} must lie in (0, 1)"))),
                _ => Ok(()),
            }
        };
        prob(self.eps, "eps")?;
        for &e in self.eps_grid.iter().flatten() {
            prob(Some(e), "eps_grid")?;
        }
        let need = |v: bool, field: &str| if v { Ok(()) } else { Err(missing(kind, field)) };
        match kind {
            ExperimentKind::Axioms => {
                need(self.pairs.is_some(), "pairs")?;
                need(self.horizon.is_some(), "horizon")?;
                if self.mode == Some(AxiomMode::MonteCarlo) {
                    need(self.trials.is_some(), "trials")?;
                }
            }
            ExperimentKind::LError => {}
            ExperimentKind::EstimateK => {
                need(self.pairs.is_some(), "pairs")?;
                need(self.eps.is_some(), "eps")?;
                need(self.trials.is_some(), "trials")?;
                need(self.horizon.is_some(), "horizon")?;
            }
            ExperimentKind::Dichotomy => {
                need(self.pairs.is_some(), "pairs")?;
                need(self.eps.is_some(), "eps")?;
                need(self.n.is_some(), "n")?;
                need(self.m.is_some(), "m")?;
                need(self.trials.is_some(), "trials")?;
            }
            ExperimentKind::IdealDemo => {
                need(self.a_f.is_some(), "a_f")?;
                need(self.a_g.is_some(), "a_g")?;
                need(self.horizon.is_some(), "horizon")?;
                need(self.trials.is_some(), "trials")?;
            }
            ExperimentKind::CrossCalib => {
                need(self.truth.is_some(), "truth")?;
                need(self.experts.as_ref().is_some_and(|e| !e.is_empty()), "experts")?;
                need(self.grid.is_some(), "grid")?;
                need(self.horizon.is_some(), "horizon")?;
            }
            ExperimentKind::Trajectory => {
                need(self.pairs.is_some(), "pairs")?;
                need(self.horizon.is_some() || self.path.is_some(), "horizon")?;
            }
            ExperimentKind::Equivalence => {
                need(self.pairs.is_some(), "pairs")?;
                need(self.test_ids().len() == 2, "tests (exactly two)")?;
                need(self.horizon.is_some(), "horizon")?;
                need(self.trials.is_some(), "trials")?;
            }
            ExperimentKind::Martingale => {
                need(self.pairs.is_some(), "pairs")?;
                need(self.horizon.is_some(), "horizon")?;
            }
        }
        Ok(())
    }
}
