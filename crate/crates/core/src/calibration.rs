//! Cross-calibration of several binary forecasters.
//!
//! `[0,1]` is cut into `N` closed intervals `I_j = [(j-1)/N, j/N]`. At each
//! period every expert's probability of outcome 1 falls in one interval; the
//! tuple of interval indices is the period's profile. An expert passes when,
//! on every profile seen often enough, the empirical frequency of 1s is
//! within `1/(2N) + δ` of the midpoint of the expert's own interval.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{Alphabet, Forecast};
use crate::history::{PlayEntry, PlayHistory, Seat};
use crate::sampling::{draw_outcome, path_rng};
use crate::strategy::Strategy;

/// Largest dense profile table we are willing to materialize.
pub const DENSE_CELL_LIMIT: u64 = 1_000_000;

pub const DEFAULT_M_MIN: u64 = 30;
pub const DEFAULT_DELTA: f64 = 0.01;

/// Which interval owns a shared endpoint `j/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryRule {
    #[default]
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalGrid {
    pub n: usize,
    pub rule: BoundaryRule,
}

impl IntervalGrid {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_rule(n, BoundaryRule::Lower)
    }

    pub fn with_rule(n: usize, rule: BoundaryRule) -> Result<Self> {
        if n <= 4 {
            return Err(Error::InvalidParameter(format!("grid size N = {n} must exceed 4")));
        }
        Ok(IntervalGrid { n, rule })
    }

    /// 1-based index of the interval holding `p`.
    pub fn interval_of(&self, p: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        let n = self.n as f64;
        let x = p * n;
        let r = x.round();
        // products like 0.4 * 5 land a few ulps off the endpoint
        if (x - r).abs() <= 1e-9 {
            let r = r as usize;
            return Ok(match self.rule {
                BoundaryRule::Lower => r.max(1),
                BoundaryRule::Upper => (r + 1).min(self.n),
            });
        }
        Ok((x.ceil() as usize).clamp(1, self.n))
    }

    /// Midpoint `(2j-1)/(2N)` of interval `j`.
    pub fn target(&self, j: usize) -> f64 {
        (2 * j - 1) as f64 / (2 * self.n) as f64
    }

    pub fn half_width(&self) -> f64 {
        1.0 / (2 * self.n) as f64
    }
}

/// Counts and outcome-1 sums per observed profile.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProfileCounter {
    pub experts: usize,
    pub cells: BTreeMap<Vec<usize>, Cell>,
    pub periods: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub nu: u64,
    pub successes: u64,
}

impl Cell {
    pub fn freq(&self) -> f64 {
        self.successes as f64 / self.nu as f64
    }
}

impl ProfileCounter {
    pub fn new(experts: usize) -> Self {
        ProfileCounter {
            experts,
            ..Default::default()
        }
    }

    pub fn record(&mut self, profile: Vec<usize>, outcome: usize) {
        debug_assert_eq!(profile.len(), self.experts);
        let cell = self.cells.entry(profile).or_default();
        cell.nu += 1;
        cell.successes += (outcome == 1) as u64;
        self.periods += 1;
    }

    pub fn total(&self) -> u64 {
        self.cells.values().map(|c| c.nu).sum()
    }

    /// Collapses every coordinate except `i`.
    pub fn marginalize(&self, i: usize) -> ProfileCounter {
        let mut out = ProfileCounter::new(1);
        out.periods = self.periods;
        for (profile, c) in &self.cells {
            let cell = out.cells.entry(vec![profile[i]]).or_default();
            cell.nu += c.nu;
            cell.successes += c.successes;
        }
        out
    }

    /// Row-major dense table of all `N^M` cells.
    pub fn to_dense(&self, grid: &IntervalGrid) -> Result<Vec<Cell>> {
        let cells = (grid.n as u64)
            .checked_pow(self.experts as u32)
            .filter(|&c| c <= DENSE_CELL_LIMIT)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "dense table of {}^{} cells exceeds {DENSE_CELL_LIMIT}",
                    grid.n, self.experts
                ))
            })?;
        let mut dense = vec![Cell::default(); cells as usize];
        for (profile, c) in &self.cells {
            let idx = profile.iter().fold(0usize, |acc, &j| acc * grid.n + (j - 1));
            dense[idx] = *c;
        }
        Ok(dense)
    }
}

/// Classifies each expert's probability of 1 and records the period.
pub fn update_counters(counter: &mut ProfileCounter, grid: &IntervalGrid, probs_of_one: &[f64], outcome: usize) -> Result<()> {
    if outcome > 1 {
        return Err(Error::InvalidOutcome { outcome, size: 2 });
    }
    let profile = probs_of_one
        .iter()
        .map(|&p| grid.interval_of(p))
        .collect::<Result<Vec<_>>>()?;
    counter.record(profile, outcome);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub forecaster: usize,
    pub profile: String,
    pub nu: u64,
    pub freq: f64,
    pub target: f64,
    pub dev: f64,
    pub audited: bool,
    pub pass: bool,
}

fn profile_label(profile: &[usize]) -> String {
    profile.iter().map(|j| j.to_string()).collect::<Vec<_>>().join("-")
}

/// Audits forecaster `i` on every profile with `ν ≥ m_min`.
pub fn evaluate_pass(counter: &ProfileCounter, grid: &IntervalGrid, i: usize, m_min: u64, delta: f64) -> (bool, Vec<ProfileRow>) {
    let bound = grid.half_width() + delta;
    let mut pass = true;
    let rows = counter
        .cells
        .iter()
        .map(|(profile, c)| {
            let freq = c.freq();
            let target = grid.target(profile[i]);
            let dev = (freq - target).abs();
            let audited = c.nu >= m_min;
            let ok = !audited || dev <= bound;
            pass &= ok;
            ProfileRow {
                forecaster: i,
                profile: profile_label(profile),
                nu: c.nu,
                freq,
                target,
                dev,
                audited,
                pass: ok,
            }
        })
        .collect();
    (pass, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertVerdict {
    pub index: usize,
    pub id: String,
    pub pass: bool,
    pub audited_profiles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCalibReport {
    pub grid: IntervalGrid,
    pub horizon: u64,
    pub m_min: u64,
    pub delta: f64,
    pub truth: String,
    pub verdicts: Vec<ExpertVerdict>,
    pub rows: Vec<ProfileRow>,
    pub counter: ProfileCounter,
}

impl CrossCalibReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("forecaster,profile,nu,freq,target,dev,audited,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.forecaster, r.profile, r.nu, r.freq, r.target, r.dev, r.audited, r.pass
            );
        }
        out
    }
}

/// Simulates `horizon` binary periods under `truth` and audits every expert.
/// Expert `i` sees a two-seat history in which it sits first and expert
/// `(i+1) mod M` second.
#[allow(clippy::too_many_arguments)]
pub fn run_cross_calibration(
    truth: &Strategy,
    experts: &[Strategy],
    horizon: u64,
    grid: IntervalGrid,
    seed: u64,
    m_min: u64,
    delta: f64,
) -> Result<CrossCalibReport> {
    if experts.is_empty() {
        return Err(Error::InvalidParameter("need at least one expert".into()));
    }
    if m_min == 0 || delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("m_min = {m_min}, δ = {delta}")));
    }
    let binary = Alphabet::BINARY;
    if truth.alphabet() != binary || experts.iter().any(|e| e.alphabet() != binary) {
        return Err(Error::InvalidParameter("cross-calibration needs binary strategies".into()));
    }
    let m = experts.len();
    let mut rng = path_rng(seed, 0);
    let mut truth_hist = PlayHistory::new(binary);
    let mut hists: Vec<PlayHistory> = (0..m).map(|_| PlayHistory::new(binary)).collect();
    let mut counter = ProfileCounter::new(m);
    let mut probs = vec![0.0; m];
    for _ in 0..horizon {
        let fc: Vec<Forecast> = experts
            .iter()
            .zip(&hists)
            .map(|(e, h)| e.forecast(h.as_prefix(), Seat::First))
            .collect();
        let law = truth.forecast(truth_hist.as_prefix(), Seat::First);
        let outcome = draw_outcome(&law, rng.gen::<f64>());
        for (p, f) in probs.iter_mut().zip(&fc) {
            *p = f.prob(1);
        }
        update_counters(&mut counter, &grid, &probs, outcome)?;
        for (i, h) in hists.iter_mut().enumerate() {
            h.push_entry(PlayEntry {
                outcome,
                first: fc[i].clone(),
                second: fc[(i + 1) % m].clone(),
            })?;
        }
        truth_hist.push_entry(PlayEntry {
            outcome,
            first: law.clone(),
            second: law,
        })?;
    }
    let mut verdicts = Vec::with_capacity(m);
    let mut rows = Vec::new();
    for (i, e) in experts.iter().enumerate() {
        let (pass, r) = evaluate_pass(&counter, &grid, i, m_min, delta);
        verdicts.push(ExpertVerdict {
            index: i,
            id: e.id(),
            pass,
            audited_profiles: r.iter().filter(|x| x.audited).count(),
        });
        rows.extend(r);
    }
    Ok(CrossCalibReport {
        grid,
        horizon,
        m_min,
        delta,
        truth: truth.id(),
        verdicts,
        rows,
        counter,
    })
}
