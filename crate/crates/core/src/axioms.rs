//! Finite-horizon checks of error-freeness and reasonableness.
//!
//! Limit sets are replaced by their horizon-`n` surrogates: a depth-`n`
//! prefix belongs to the left set `L_ε` when the propensity computed from
//! its `n`-history exceeds `ε`, to the right set `R_ε` when it is below `ε`,
//! and to neither on equality. All reports are labeled finite-horizon.
//!
//! Exact mode enumerates every depth-`n` prefix and sums induced
//! probabilities. Monte Carlo mode samples each measure in its own run;
//! no likelihood-ratio reweighting is used.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::{ComparisonTest, LikelihoodTest};
use crate::error::{Error, Result};
use crate::forecast::{Alphabet, Forecast, OutcomePrefix};
use crate::history::{PlayHistory, Seat};
use crate::sampling::{derive_seed, sample_path, NatureLaw, TruthProcess};
use crate::stats::Proportion;
use crate::strategy::{Delta, ForecastingStrategy, Scripted, Strategy};
use crate::tree;

/// Violations at or below this size are numerical noise.
pub const VIOLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `L_ε` (propensity above ε) or `R_ε` (below ε) at a fixed horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub epsilon: f64,
    pub side: Side,
    pub horizon: usize,
    pub members: BTreeSet<OutcomePrefix>,
}

/// Default ε grid: 0.05..0.45 and 0.55..0.95 in steps of 0.05.
pub fn default_eps_grid() -> Vec<f64> {
    (1..=19).filter(|&k| k != 10).map(|k| k as f64 / 20.0).collect()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) || eps == 0.5 {
        return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1) \\ {{1/2}}")));
    }
    Ok(())
}

/// Every depth-`n` prefix with its two induced probabilities and the
/// test's propensity, in lexicographic order.
#[derive(Debug, Clone)]
pub struct LeafTable {
    pub horizon: usize,
    pub prefixes: Vec<OutcomePrefix>,
    pub prob_f: Vec<f64>,
    pub prob_g: Vec<f64>,
    pub propensity: Vec<f64>,
}

impl LeafTable {
    pub fn build(
        test: &dyn ComparisonTest,
        f: &dyn ForecastingStrategy,
        g: &dyn ForecastingStrategy,
        horizon: usize,
    ) -> Result<Self> {
        let n = tree::leaf_count(f.alphabet(), horizon)? as usize;
        let mut t = LeafTable {
            horizon,
            prefixes: Vec::with_capacity(n),
            prob_f: Vec::with_capacity(n),
            prob_g: Vec::with_capacity(n),
            propensity: Vec::with_capacity(n),
        };
        tree::for_each_leaf(f, g, horizon, |h| {
            t.prefixes.push(h.outcomes());
            t.prob_f.push(h.log_prefix_prob(Seat::First).prob());
            t.prob_g.push(h.log_prefix_prob(Seat::Second).prob());
            t.propensity.push(test.propensity(h.as_prefix()));
        })?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn side_of(&self, i: usize, eps: f64) -> Option<Side> {
        let p = self.propensity[i];
        if p > eps {
            Some(Side::Left)
        } else if p < eps {
            Some(Side::Right)
        } else {
            None
        }
    }

    fn mass(&self, members: &[bool], pick: Seat) -> f64 {
        let probs = match pick {
            Seat::First => &self.prob_f,
            Seat::Second => &self.prob_g,
        };
        members.iter().zip(probs).filter(|(m, _)| **m).map(|(_, p)| p).sum()
    }
}

/// Classifies every depth-`horizon` prefix into `(L_ε, R_ε)`.
pub fn enumerate_threshold_sets(
    test: &dyn ComparisonTest,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    horizon: usize,
    eps: f64,
) -> Result<(ThresholdSet, ThresholdSet)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1)")));
    }
    let table = LeafTable::build(test, f, g, horizon)?;
    Ok(threshold_sets_from(&table, eps))
}

pub fn threshold_sets_from(table: &LeafTable, eps: f64) -> (ThresholdSet, ThresholdSet) {
    let mut left = BTreeSet::new();
    let mut right = BTreeSet::new();
    for i in 0..table.len() {
        match table.side_of(i, eps) {
            Some(Side::Left) => {
                left.insert(table.prefixes[i].clone());
            }
            Some(Side::Right) => {
                right.insert(table.prefixes[i].clone());
            }
            None => {}
        }
    }
    let mk = |side, members| ThresholdSet {
        epsilon: eps,
        side,
        horizon: table.horizon,
        members,
    };
    (mk(Side::Left, left), mk(Side::Right, right))
}

/// The family of events `A` the axioms are checked against.
#[derive(Debug, Clone, Default)]
pub enum SetFamily {
    /// Every depth-`n` cylinder, the full space, and the threshold sets
    /// `L_ε`, `R_ε` themselves.
    #[default]
    Standard,
    /// Named unions of cylinders. Each prefix may be shorter than the horizon.
    Custom(Vec<(String, Vec<OutcomePrefix>)>),
}

struct NamedSet {
    id: String,
    members: Vec<bool>,
}

fn family_sets(family: &SetFamily, table: &LeafTable, eps: f64) -> Vec<NamedSet> {
    let n = table.len();
    match family {
        SetFamily::Standard => {
            let mut sets: Vec<NamedSet> = (0..n)
                .map(|i| {
                    let mut members = vec![false; n];
                    members[i] = true;
                    NamedSet {
                        id: format!("cyl:{}", table.prefixes[i]),
                        members,
                    }
                })
                .collect();
            sets.push(NamedSet {
                id: "full".into(),
                members: vec![true; n],
            });
            for (id, side) in [("L", Side::Left), ("R", Side::Right)] {
                sets.push(NamedSet {
                    id: id.into(),
                    members: (0..n).map(|i| table.side_of(i, eps) == Some(side)).collect(),
                });
            }
            sets
        }
        SetFamily::Custom(named) => named
            .iter()
            .map(|(id, cylinders)| NamedSet {
                id: id.clone(),
                members: table
                    .prefixes
                    .iter()
                    .map(|p| cylinders.iter().any(|c| c.is_prefix_of(p.as_slice())))
                    .collect(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    ErrorFree,
    Reasonable,
    /// A single-measure probability estimate (Monte Carlo only).
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Mode {
    ExactEnumeration,
    MonteCarlo { trials: u64 },
}

/// One `(test, ε, A)` record.
///
/// For error-freeness `lhs` is the mass the wronged forecaster puts on the
/// verdict event and `rhs` the permitted bound; `violation = max(lhs - rhs, 0)`.
/// For reasonableness `lhs` is the conclusion probability, `rhs` is zero and
/// `violation` is 1 exactly when the premise holds but the conclusion fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomRow {
    pub test: String,
    pub pair: String,
    pub horizon: usize,
    pub axiom: Axiom,
    pub eps: f64,
    pub set_id: String,
    pub premise: Option<bool>,
    pub lhs: f64,
    pub rhs: f64,
    pub violation: f64,
    pub mode: String,
    pub ci: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub test: String,
    pub pair: String,
    pub horizon: usize,
    pub eps_grid: Vec<f64>,
    pub mode: Mode,
    pub rows: Vec<AxiomRow>,
    pub worst_violation: f64,
    /// Rows whose violation exceeds [`VIOLATION_TOL`].
    pub violations: usize,
    pub finite_horizon: bool,
}

impl AxiomReport {
    fn finish(test: String, pair: String, horizon: usize, eps_grid: Vec<f64>, mode: Mode, rows: Vec<AxiomRow>) -> Self {
        let worst_violation = rows.iter().map(|r| r.violation).fold(0.0, f64::max);
        let violations = rows.iter().filter(|r| r.violation > VIOLATION_TOL).count();
        AxiomReport {
            test,
            pair,
            horizon,
            eps_grid,
            mode,
            rows,
            worst_violation,
            violations,
            finite_horizon: true,
        }
    }

    pub fn violating_rows(&self) -> impl Iterator<Item = &AxiomRow> {
        self.rows.iter().filter(|r| r.violation > VIOLATION_TOL)
    }
}

pub fn pair_id(f: &dyn ForecastingStrategy, g: &dyn ForecastingStrategy) -> String {
    format!("{}|{}", f.id(), g.id())
}

const EXACT: &str = "exact-enumeration";

/// Exact error-freeness check at a finite horizon.
///
/// For `ε < 1/2`: `f(A ∩ R_ε) ≤ ε/(1-ε) · g(A ∩ R_ε)`.
/// For `ε > 1/2`: `g(A ∩ L_ε) ≤ (1-ε)/ε · f(A ∩ L_ε)`.
pub fn check_error_free_exact(
    test: &dyn ComparisonTest,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    horizon: usize,
    eps_grid: &[f64],
    family: &SetFamily,
) -> Result<AxiomReport> {
    let table = LeafTable::build(test, f, g, horizon)?;
    error_free_from_table(&table, &test.id(), &pair_id(f, g), eps_grid, family)
}

pub fn error_free_from_table(
    table: &LeafTable,
    test: &str,
    pair: &str,
    eps_grid: &[f64],
    family: &SetFamily,
) -> Result<AxiomReport> {
    let mut rows = Vec::new();
    for &eps in eps_grid {
        check_eps(eps)?;
        let (side, wronged, favored, ratio) = if eps < 0.5 {
            (Side::Right, Seat::First, Seat::Second, eps / (1.0 - eps))
        } else {
            (Side::Left, Seat::Second, Seat::First, (1.0 - eps) / eps)
        };
        for set in family_sets(family, table, eps) {
            let inter: Vec<bool> = (0..table.len())
                .map(|i| set.members[i] && table.side_of(i, eps) == Some(side))
                .collect();
            let lhs = table.mass(&inter, wronged);
            let rhs = ratio * table.mass(&inter, favored);
            rows.push(AxiomRow {
                test: test.into(),
                pair: pair.into(),
                horizon: table.horizon,
                axiom: Axiom::ErrorFree,
                eps,
                set_id: set.id,
                premise: None,
                lhs,
                rhs,
                violation: (lhs - rhs).max(0.0),
                mode: EXACT.into(),
                ci: None,
            });
        }
    }
    Ok(AxiomReport::finish(
        test.into(),
        pair.into(),
        table.horizon,
        eps_grid.to_vec(),
        Mode::ExactEnumeration,
        rows,
    ))
}

/// Exact reasonableness check at a finite horizon.
///
/// For `ε < 1/2`: `g(A) > 0` and `f(A) < ε/(1-ε) · g(A)` imply `g(A ∩ R_ε) > 0`.
/// For `ε > 1/2`: `f(A) > 0` and `g(A) < (1-ε)/ε · f(A)` imply `f(A ∩ L_ε) > 0`.
pub fn check_reasonable_exact(
    test: &dyn ComparisonTest,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    horizon: usize,
    eps_grid: &[f64],
    family: &SetFamily,
) -> Result<AxiomReport> {
    let table = LeafTable::build(test, f, g, horizon)?;
    reasonable_from_table(&table, &test.id(), &pair_id(f, g), eps_grid, family)
}

pub fn reasonable_from_table(
    table: &LeafTable,
    test: &str,
    pair: &str,
    eps_grid: &[f64],
    family: &SetFamily,
) -> Result<AxiomReport> {
    let mut rows = Vec::new();
    for &eps in eps_grid {
        check_eps(eps)?;
        let (side, favored, other, ratio) = if eps < 0.5 {
            (Side::Right, Seat::Second, Seat::First, eps / (1.0 - eps))
        } else {
            (Side::Left, Seat::First, Seat::Second, (1.0 - eps) / eps)
        };
        for set in family_sets(family, table, eps) {
            let fav_mass = table.mass(&set.members, favored);
            let other_mass = table.mass(&set.members, other);
            let premise = fav_mass > 0.0 && other_mass < ratio * fav_mass;
            let inter: Vec<bool> = (0..table.len())
                .map(|i| set.members[i] && table.side_of(i, eps) == Some(side))
                .collect();
            let conclusion = table.mass(&inter, favored);
            rows.push(AxiomRow {
                test: test.into(),
                pair: pair.into(),
                horizon: table.horizon,
                axiom: Axiom::Reasonable,
                eps,
                set_id: set.id,
                premise: Some(premise),
                lhs: conclusion,
                rhs: 0.0,
                violation: if premise && conclusion <= 0.0 { 1.0 } else { 0.0 },
                mode: EXACT.into(),
                ci: None,
            });
        }
    }
    Ok(AxiomReport::finish(
        test.into(),
        pair.into(),
        table.horizon,
        eps_grid.to_vec(),
        Mode::ExactEnumeration,
        rows,
    ))
}

/// One row of the likelihood-test error table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LErrorRow {
    pub eps: f64,
    /// Mass the deterministic forecaster puts on the all-ones realization.
    pub lhs: f64,
    /// Mass the day-one-hedging forecaster puts on it.
    pub f_mass: f64,
    /// `(1-ε)/ε · f_mass`.
    pub bound: f64,
    /// `lhs / bound = ε / (1-ε)^2`.
    pub ratio: f64,
    /// The likelihood test's verdict along the realization at the horizon.
    pub l_verdict: f64,
}

/// The pair used against the likelihood test: `f` predicts `1-ε` for
/// outcome 1 on day one and then always predicts 1; `g` always predicts 1.
pub fn l_error_pair(eps: f64) -> Result<(Strategy, Strategy)> {
    let a = Alphabet::BINARY;
    let always: Strategy = std::sync::Arc::new(Delta::always(a, 1)?);
    let f: Strategy = std::sync::Arc::new(Scripted::new(vec![Forecast::binary(1.0 - eps)?], always.clone()));
    Ok((f, always))
}

/// Evaluates the likelihood-test construction for each `ε ∈ (1/2, 1)`.
///
/// The masses are computed by replaying the all-ones realization through
/// both strategies for `horizon` periods (the masses are constant after
/// day one).
pub fn l_test_unbounded_error(eps_grid: &[f64], horizon: usize) -> Result<Vec<LErrorRow>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    eps_grid
        .iter()
        .map(|&eps| {
            if !(eps > 0.5 && eps < 1.0) {
                return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (1/2, 1)")));
            }
            let (f, g) = l_error_pair(eps)?;
            let ones = vec![1; horizon];
            let h = PlayHistory::replay(Alphabet::BINARY, &*f, &*g, &ones)?;
            let f_mass = h.log_prefix_prob(Seat::First).prob();
            let lhs = h.log_prefix_prob(Seat::Second).prob();
            let bound = (1.0 - eps) / eps * f_mass;
            Ok(LErrorRow {
                eps,
                lhs,
                f_mass,
                bound,
                ratio: lhs / bound,
                l_verdict: LikelihoodTest.propensity(h.as_prefix()),
            })
        })
        .collect()
}

/// Propensities at `horizon` for `trials` paths sampled under one seat's law.
fn sampled_propensities(
    tests: &[&dyn ComparisonTest],
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    truth: Seat,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let base = TruthProcess::new(NatureLaw::Seat(truth), seed);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(&base.with_stream(i), f, g, horizon);
            tests.iter().map(|t| t.propensity(path.as_prefix())).collect()
        })
        .collect()
}

/// Estimates the truth's probabilities of `L_ε` and `R_ε` at the horizon.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_axiom_estimate(
    test: &dyn ComparisonTest,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    truth: Seat,
    horizon: usize,
    eps_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<AxiomReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let props: Vec<f64> = sampled_propensities(&[test], f, g, truth, horizon, trials, seed)
        .into_iter()
        .map(|v| v[0])
        .collect();
    let measure = match truth {
        Seat::First => "f",
        Seat::Second => "g",
    };
    let mut rows = Vec::new();
    for &eps in eps_grid {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1)")));
        }
        for (id, side) in [("L", Side::Left), ("R", Side::Right)] {
            let est = Proportion::from_flags(props.iter().map(|&p| match side {
                Side::Left => p > eps,
                Side::Right => p < eps,
            }));
            rows.push(AxiomRow {
                test: test.id(),
                pair: pair_id(f, g),
                horizon,
                axiom: Axiom::Estimate,
                eps,
                set_id: format!("{measure}:{id}"),
                premise: None,
                lhs: est.estimate(),
                rhs: 0.0,
                violation: 0.0,
                mode: "monte-carlo".into(),
                ci: Some(est.ci_half_width()),
            });
        }
    }
    Ok(AxiomReport::finish(
        test.id(),
        pair_id(f, g),
        horizon,
        eps_grid.to_vec(),
        Mode::MonteCarlo { trials },
        rows,
    ))
}

/// Monte Carlo version of the error-freeness inequality on `A = full space`:
/// `f(R_ε)` and `g(R_ε)` (or the mirrored pair for `ε > 1/2`) come from two
/// separate runs. The reported CI is `ci_lhs + ratio · ci_other`.
pub fn monte_carlo_error_free(
    test: &dyn ComparisonTest,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    horizon: usize,
    eps_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<AxiomReport> {
    let under_f = monte_carlo_axiom_estimate(test, f, g, Seat::First, horizon, eps_grid, trials, derive_seed(seed, "f"))?;
    let under_g = monte_carlo_axiom_estimate(test, f, g, Seat::Second, horizon, eps_grid, trials, derive_seed(seed, "g"))?;
    let find = |rep: &AxiomReport, eps: f64, suffix: &str| -> (f64, f64) {
        let r = rep
            .rows
            .iter()
            .find(|r| r.eps == eps && r.set_id.ends_with(suffix))
            .expect("estimate row present");
        (r.lhs, r.ci.unwrap_or(0.0))
    };
    let mut rows = Vec::new();
    for &eps in eps_grid {
        check_eps(eps)?;
        let (wronged, favored, suffix, ratio) = if eps < 0.5 {
            (&under_f, &under_g, ":R", eps / (1.0 - eps))
        } else {
            (&under_g, &under_f, ":L", (1.0 - eps) / eps)
        };
        let (lhs, ci_l) = find(wronged, eps, suffix);
        let (other, ci_o) = find(favored, eps, suffix);
        let rhs = ratio * other;
        rows.push(AxiomRow {
            test: test.id(),
            pair: pair_id(f, g),
            horizon,
            axiom: Axiom::ErrorFree,
            eps,
            set_id: "full".into(),
            premise: None,
            lhs,
            rhs,
            violation: (lhs - rhs).max(0.0),
            mode: "monte-carlo".into(),
            ci: Some(ci_l + ratio * ci_o),
        });
    }
    Ok(AxiomReport::finish(
        test.id(),
        pair_id(f, g),
        horizon,
        eps_grid.to_vec(),
        Mode::MonteCarlo { trials },
        rows,
    ))
}

/// Disagreement estimate between two tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub estimate: f64,
    pub ci: f64,
    pub trials: u64,
    pub delta: f64,
}

/// Probability under `truth` that `|T_n - T̂_n| > δ` at the horizon.
#[allow(clippy::too_many_arguments)]
pub fn equivalence_probe(
    test_a: &dyn ComparisonTest,
    test_b: &dyn ComparisonTest,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    truth: Seat,
    horizon: usize,
    trials: u64,
    seed: u64,
    delta: f64,
) -> Result<Disagreement> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("δ = {delta} must be positive")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let props = sampled_propensities(&[test_a, test_b], f, g, truth, horizon, trials, seed);
    let p = Proportion::from_flags(props.iter().map(|v| (v[0] - v[1]).abs() > delta));
    Ok(Disagreement {
        estimate: p.estimate(),
        ci: p.ci_half_width(),
        trials,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::{ConstantFair, FiniteDerivative, H2Counterexample};
    use crate::strategy::parse_strategy;

    fn s(id: &str) -> Strategy {
        parse_strategy(id, Alphabet::BINARY).unwrap()
    }

    #[test]
    fn default_grid_has_eighteen_points() {
        let g = default_eps_grid();
        assert_eq!(g.len(), 18);
        assert!(!g.contains(&0.5));
        assert!((g[0] - 0.05).abs() < 1e-15 && (g[17] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn fair_test_puts_everything_on_one_side() {
        let (l, r) = enumerate_threshold_sets(&ConstantFair, &*s("fair"), &*s("iid:0.9"), 4, 0.3).unwrap();
        assert_eq!(l.members.len(), 16);
        assert!(r.members.is_empty());
        let (l, r) = enumerate_threshold_sets(&ConstantFair, &*s("fair"), &*s("iid:0.9"), 4, 0.7).unwrap();
        assert!(l.members.is_empty());
        assert_eq!(r.members.len(), 16);
    }

    #[test]
    fn derivative_with_equal_forecasters_has_empty_sets() {
        let f = s("iid:0.3");
        for eps in [0.1, 0.45, 0.55, 0.9] {
            let (l, r) = enumerate_threshold_sets(&FiniteDerivative, &*f, &*f, 5, eps).unwrap();
            // 𝒟 ≡ 1/2, so for ε < 1/2 everything is left, for ε > 1/2 right
            if eps < 0.5 {
                assert!(r.members.is_empty());
            } else {
                assert!(l.members.is_empty());
            }
        }
    }

    #[test]
    fn derivative_membership_matches_ratio_sign() {
        let (f, g) = (s("fair"), s("iid:0.9"));
        let (l, r) = enumerate_threshold_sets(&FiniteDerivative, &*f, &*g, 8, 0.5).unwrap();
        assert_eq!(l.members.len() + r.members.len(), 256);
        // independent oracle: linear-arithmetic ratio per prefix
        for bits in 0..256u32 {
            let outcomes: Vec<usize> = (0..8).rev().map(|k| ((bits >> k) & 1) as usize).collect();
            let (mut pf, mut pg) = (1.0, 1.0);
            for &o in &outcomes {
                pf *= 0.5;
                pg *= if o == 1 { 0.9 } else { 0.1 };
            }
            let p = OutcomePrefix::from(outcomes);
            assert_eq!(l.members.contains(&p), pf > pg, "{p}");
            assert_eq!(r.members.contains(&p), pf < pg, "{p}");
        }
    }

    #[test]
    fn eps_half_is_rejected_for_axioms() {
        let f = s("fair");
        assert!(check_error_free_exact(&FiniteDerivative, &*f, &*f, 2, &[0.5], &SetFamily::Standard).is_err());
    }

    #[test]
    fn derivative_is_error_free_exactly() {
        let rep = check_error_free_exact(&FiniteDerivative, &*s("fair"), &*s("iid:0.9"), 8, &default_eps_grid(), &SetFamily::Standard)
            .unwrap();
        assert_eq!(rep.violations, 0, "{:?}", rep.violating_rows().next());
    }

    #[test]
    fn constant_fair_error_free_but_not_reasonable() {
        let (f, g) = (s("fair"), s("delta:1"));
        let grid = default_eps_grid();
        let ef = check_error_free_exact(&ConstantFair, &*f, &*g, 6, &grid, &SetFamily::Standard).unwrap();
        assert_eq!(ef.violations, 0);
        let ones = SetFamily::Custom(vec![("ones".into(), vec![OutcomePrefix::from(vec![1; 6])])]);
        let rs = check_reasonable_exact(&ConstantFair, &*f, &*g, 6, &[0.1], &ones).unwrap();
        assert_eq!(rs.rows[0].premise, Some(true));
        assert_eq!(rs.violations, 1);
    }

    #[test]
    fn derivative_reasonable_on_all_ones_cylinder() {
        let n = 6;
        let ones = SetFamily::Custom(vec![("ones".into(), vec![OutcomePrefix::from(vec![1; n])])]);
        let rs = check_reasonable_exact(&FiniteDerivative, &*s("fair"), &*s("delta:1"), n, &[0.1, 0.3], &ones).unwrap();
        for r in &rs.rows {
            assert_eq!(r.premise, Some(true));
            assert_eq!(r.lhs, 1.0);
        }
        assert_eq!(rs.violations, 0);
    }

    #[test]
    fn zero_mass_set_is_vacuous() {
        let zeros = SetFamily::Custom(vec![("zeros".into(), vec![OutcomePrefix::from(vec![0])])]);
        let rs = check_reasonable_exact(&ConstantFair, &*s("fair"), &*s("delta:1"), 4, &[0.2], &zeros).unwrap();
        assert_eq!(rs.rows[0].premise, Some(false));
        assert_eq!(rs.violations, 0);
    }

    #[test]
    fn h2_test_violates_error_freeness() {
        let t = H2Counterexample::new();
        let a = Alphabet::BINARY;
        let f = s("delta:1");
        let g = Scripted::new(vec![Forecast::uniform(a)], s("delta:1"));
        let ones = SetFamily::Custom(vec![("omega~".into(), vec![OutcomePrefix::from(vec![1; 5])])]);
        let rep = check_error_free_exact(&t, &*f, &g, 5, &[1.0 / 3.0], &ones).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.lhs, 1.0);
        assert!((row.rhs - 0.25).abs() < 1e-15);
        assert_eq!(rep.violations, 1);
    }

    #[test]
    fn l_error_table_matches_closed_form() {
        let rows = l_test_unbounded_error(&[0.75, 0.9], 12).unwrap();
        assert_eq!(rows[0].lhs, 1.0);
        assert!((rows[0].f_mass - 0.25).abs() < 1e-15);
        assert!((rows[0].bound - 0.25 / 3.0).abs() < 1e-15);
        assert!((rows[0].ratio - 12.0).abs() < 1e-9);
        assert!((rows[1].ratio - 90.0).abs() < 1e-9);
        assert_eq!(rows[0].l_verdict, 0.0);
        let near = l_test_unbounded_error(&[0.5 + 1e-9], 3).unwrap();
        assert!((near[0].ratio - 2.0).abs() < 1e-6);
        assert!(l_test_unbounded_error(&[0.4], 3).is_err());
    }

    #[test]
    fn likelihood_test_has_genuine_error_on_hedging_pair() {
        // f hedges on day one (0.25 on outcome 1), g is certain; L settles on g
        // although f keeps 1/4 of its mass there.
        let (f, g) = l_error_pair(0.75).unwrap();
        let ones = SetFamily::Custom(vec![("omega~".into(), vec![OutcomePrefix::from(vec![1; 6])])]);
        let rep = check_error_free_exact(&LikelihoodTest, &*f, &*g, 6, &[0.1], &ones).unwrap();
        let row = &rep.rows[0];
        assert!((row.lhs - 0.25).abs() < 1e-15);
        assert!((row.rhs - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(rep.violations, 1);
        // 𝒟 on the same pair is not fooled
        let rep = check_error_free_exact(&FiniteDerivative, &*f, &*g, 6, &default_eps_grid(), &SetFamily::Standard).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn mc_equal_forecasters_right_set_empty() {
        let f = s("iid:0.4");
        let rep = monte_carlo_axiom_estimate(&FiniteDerivative, &*f, &*f, Seat::First, 50, &[0.3], 200, 1).unwrap();
        let r = rep.rows.iter().find(|r| r.set_id == "f:R").unwrap();
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn mc_single_trial_ci_cap() {
        let f = s("fair");
        let rep = monte_carlo_axiom_estimate(&FiniteDerivative, &*f, &*s("iid:0.9"), Seat::First, 10, &[0.3], 1, 1).unwrap();
        assert!(rep.rows.iter().all(|r| r.ci == Some(0.5)));
    }

    #[test]
    fn mc_derivative_error_free_on_full_space() {
        let rep = monte_carlo_error_free(&FiniteDerivative, &*s("fair"), &*s("iid:0.7"), 40, &[0.2, 0.8], 2000, 9).unwrap();
        for r in &rep.rows {
            assert!(r.lhs <= r.rhs + r.ci.unwrap(), "{r:?}");
        }
    }

    #[test]
    fn equivalence_of_a_test_with_itself_is_zero() {
        let d = equivalence_probe(&FiniteDerivative, &FiniteDerivative, &*s("fair"), &*s("iid:0.6"), Seat::First, 30, 100, 3, 1e-9)
            .unwrap();
        assert_eq!(d.estimate, 0.0);
    }
}
