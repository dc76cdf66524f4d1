//! Finite-time decisiveness of the finite derivative test.
//!
//! The likelihood ratio `D_f^t g = g(ω^t)/f(ω^t)` is subsampled at stopping
//! times `τ_0 = 0 < τ_1 < …` where either
//!
//! - the one-step jump condition holds: `f(ω^{t-1}) > 0` and the f-probability
//!   of a one-step multiplier `g(x)/f(x)` deviating from 1 by more than
//!   `ε/|Ω|` exceeds `ε/|Ω|`; or
//! - the drift condition holds: `D^t / D^{τ_{k-1}} - 1 ≥ ε/(2|Ω|)`.
//!
//! The stopped values `D̃_k = D^{τ_k}` (0 once `τ_k = ∞`) form an active
//! supermartingale under `f` with activity `ε/(2|Ω|)`. Within a finite
//! horizon, "no further stopping time" is recorded as `τ_k = ∞`.
//!
//! Truth is always the first forecaster for these experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::derivative_propensity;
use crate::error::{Error, Result};
use crate::forecast::Forecast;
use crate::history::{PlayHistory, PlayPath, RatioState, Seat};
use crate::sampling::{derive_seed, sample_path, NatureLaw, TruthProcess};
use crate::stats::Proportion;
use crate::strategy::{ForecastingStrategy, Iid, Strategy};
use crate::tree;

/// Relative tolerance for the exact supermartingale checks.
pub const SUPERMARTINGALE_TOL: f64 = 1e-10;

/// Per-period ε-closeness along a realized path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessLedger {
    pub horizon: usize,
    pub epsilon: f64,
    /// `close[t-1]` is true iff `|f(..)[ω_t] - g(..)[ω_t]| < ε`.
    pub close: Vec<bool>,
    pub far_count: usize,
}

pub fn closeness_ledger(path: &PlayPath, eps: f64) -> ClosenessLedger {
    closeness_ledger_upto(path, eps, path.len())
}

/// Ledger over the first `n` periods only.
pub fn closeness_ledger_upto(path: &PlayPath, eps: f64, n: usize) -> ClosenessLedger {
    let close: Vec<bool> = path.entries()[..n]
        .iter()
        .map(|e| (e.first.prob(e.outcome) - e.second.prob(e.outcome)).abs() < eps)
        .collect();
    let far_count = close.iter().filter(|c| !**c).count();
    ClosenessLedger {
        horizon: n,
        epsilon: eps,
        close,
        far_count,
    }
}

/// f-probability that the one-step multiplier `g(x)/f(x)` deviates from 1
/// by more than `threshold`. Outcomes `f` rules out carry no mass.
pub fn jump_probability(f: &Forecast, g: &Forecast, threshold: f64) -> f64 {
    f.probs()
        .iter()
        .zip(g.probs())
        .filter(|(&pf, &pg)| pf > 0.0 && (pg / pf - 1.0).abs() > threshold)
        .map(|(&pf, _)| pf)
        .sum()
}

/// The one-step jump condition at a node with the given forecasts.
pub fn jump_condition(f: &Forecast, g: &Forecast, eps: f64) -> bool {
    let t = eps / f.len() as f64;
    jump_probability(f, g, t) > t
}

/// The drift condition between log ratios at the last stop and now.
pub fn drift_condition(log_now: f64, log_at_stop: f64, eps: f64, size: usize) -> bool {
    if !log_now.is_finite() || !log_at_stop.is_finite() {
        return false;
    }
    (log_now - log_at_stop).exp() - 1.0 >= eps / (2.0 * size as f64)
}

fn log_ratio(logs: [f64; 2]) -> f64 {
    let r = RatioState::from_logs(logs[0], logs[1]);
    if r.both_zero {
        f64::NEG_INFINITY
    } else {
        r.log_ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopTrigger {
    JumpProb,
    Drift,
}

/// `D̃_k` along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppedRatioProcess {
    pub horizon: usize,
    pub epsilon: f64,
    /// Finite stopping times, starting with `τ_0 = 0`.
    pub taus: Vec<usize>,
    /// `ln D̃_k` for each finite stopping time (`-inf` encodes 0).
    pub log_values: Vec<f64>,
    /// Trigger of `τ_k` for `k ≥ 1` (`triggers[k-1]`).
    pub triggers: Vec<StopTrigger>,
    /// Periods whose jump condition was skipped because `f(ω^{t-1}) = 0`.
    pub skipped: usize,
}

impl StoppedRatioProcess {
    /// Number of finite stopping times after `τ_0`.
    pub fn stops(&self) -> usize {
        self.taus.len() - 1
    }

    /// `D̃_k`; zero once `τ_k` is infinite.
    pub fn value(&self, k: usize) -> f64 {
        self.log_values.get(k).map_or(0.0, |l| l.exp())
    }

    /// `τ_k`, or `None` for `∞` within the horizon.
    pub fn tau(&self, k: usize) -> Option<usize> {
        self.taus.get(k).copied()
    }

    /// Smallest `K` with `D̃_k < ε` for every `k > K` (within the horizon).
    pub fn last_exceedance(&self, level: f64) -> usize {
        (1..self.log_values.len())
            .rev()
            .find(|&k| self.value(k) >= level)
            .unwrap_or(0)
    }
}

/// Builds `D̃` along a path (normally sampled with truth = first seat).
pub fn build_stopped_process(path: &PlayPath, eps: f64) -> StoppedRatioProcess {
    let size = path.alphabet().size();
    let prefix = path.as_prefix();
    let mut p = StoppedRatioProcess {
        horizon: path.len(),
        epsilon: eps,
        taus: vec![0],
        log_values: vec![0.0],
        triggers: Vec::new(),
        skipped: 0,
    };
    let mut log_at_stop = 0.0;
    for (i, e) in path.entries().iter().enumerate() {
        let t = i + 1;
        let before = prefix.log_probs_at(i);
        let jump = if before[0] == f64::NEG_INFINITY {
            p.skipped += 1;
            false
        } else {
            jump_condition(&e.first, &e.second, eps)
        };
        let log_now = log_ratio(prefix.log_probs_at(t));
        let trigger = if jump {
            Some(StopTrigger::JumpProb)
        } else if drift_condition(log_now, log_at_stop, eps, size) {
            Some(StopTrigger::Drift)
        } else {
            None
        };
        if let Some(tr) = trigger {
            p.taus.push(t);
            p.log_values.push(log_now);
            p.triggers.push(tr);
            log_at_stop = log_now;
        }
    }
    p
}

/// Result of the exact active-supermartingale check.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SupermartingaleReport {
    pub depth: usize,
    pub epsilon: f64,
    pub activity: f64,
    /// Stopping nodes at which `E_f[D̃_k | ·] ≤ D̃_{k-1}` was checked.
    pub nodes_checked: usize,
    pub supermartingale_failures: usize,
    /// Nodes where the inequality held with equality.
    pub equality_nodes: usize,
    /// Nodes where some branch reached the depth without stopping.
    pub censored_nodes: usize,
    pub activity_checked: usize,
    pub activity_failures: usize,
    /// Smallest `jump probability - activity` over checked nodes.
    pub min_activity_margin: Option<f64>,
    /// Nodes skipped because `f` gives them probability zero.
    pub skipped_f_null: usize,
    /// Largest `E - D̃_{k-1}` (positive values are violations).
    pub max_excess: f64,
}

impl SupermartingaleReport {
    pub fn passed(&self) -> bool {
        self.supermartingale_failures == 0 && self.activity_failures == 0
    }
}

struct Segment {
    expect: f64,
    jump_mass: f64,
    censored: bool,
}

struct Ctx<'a> {
    f: &'a dyn ForecastingStrategy,
    g: &'a dyn ForecastingStrategy,
    eps: f64,
    depth: usize,
    size: usize,
    activity: f64,
}

/// Checks, by exact enumeration to `depth`, that `D̃` is a supermartingale
/// under `f` and that every stopping node with `D̃ > 0` jumps by more than
/// `ε/(2|Ω|)` (relative) with f-probability above `ε/(2|Ω|)`.
pub fn verify_active_supermartingale(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    eps: f64,
    depth: usize,
) -> Result<SupermartingaleReport> {
    let alphabet = f.alphabet();
    tree::leaf_count(alphabet, depth)?;
    let size = alphabet.size();
    let activity = eps / (2.0 * size as f64);
    let ctx = Ctx {
        f,
        g,
        eps,
        depth,
        size,
        activity,
    };
    let mut report = SupermartingaleReport {
        depth,
        epsilon: eps,
        activity,
        max_excess: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut h = PlayHistory::with_capacity(alphabet, depth);
    process_stop(&ctx, &mut h, &mut report);
    if report.nodes_checked == 0 {
        report.max_excess = 0.0;
    }
    Ok(report)
}

fn process_stop(ctx: &Ctx<'_>, h: &mut PlayHistory, report: &mut SupermartingaleReport) {
    if h.len() == ctx.depth {
        return;
    }
    let logs = h.as_prefix().log_probs_at(h.len());
    if logs[0] == f64::NEG_INFINITY {
        report.skipped_f_null += 1;
        return;
    }
    let log_prev = log_ratio(logs);
    let prev = log_prev.exp();
    let mut seg = Segment {
        expect: 0.0,
        jump_mass: 0.0,
        censored: false,
    };
    walk_segment(ctx, h, log_prev, 1.0, &mut seg, report);

    report.nodes_checked += 1;
    let excess = seg.expect - prev;
    let tol = SUPERMARTINGALE_TOL * prev.max(1.0);
    report.max_excess = report.max_excess.max(excess);
    if excess > tol {
        report.supermartingale_failures += 1;
    } else if excess.abs() <= tol {
        report.equality_nodes += 1;
    }
    if seg.censored {
        report.censored_nodes += 1;
    }
    if prev > 0.0 {
        report.activity_checked += 1;
        let margin = seg.jump_mass - ctx.activity;
        report.min_activity_margin = Some(report.min_activity_margin.map_or(margin, |m: f64| m.min(margin)));
        if seg.jump_mass <= ctx.activity - 1e-12 {
            report.activity_failures += 1;
        }
    }
}

/// Walks forward from the node in `h` until the next stopping time on each
/// branch, accumulating the f-weighted next stopped value.
fn walk_segment(
    ctx: &Ctx<'_>,
    h: &mut PlayHistory,
    log_at_stop: f64,
    weight: f64,
    seg: &mut Segment,
    report: &mut SupermartingaleReport,
) {
    let (ff, gf) = h.forecasts(ctx.f, ctx.g);
    let f_alive = h.as_prefix().log_probs_at(h.len())[0] > f64::NEG_INFINITY;
    let jump = f_alive && jump_condition(&ff, &gf, ctx.eps);
    let prev = log_at_stop.exp();
    for x in 0..ctx.size {
        let px = ff.prob(x);
        if px == 0.0 {
            continue;
        }
        h.push_step(ctx.f, ctx.g, x).expect("outcome in alphabet");
        let log_now = log_ratio(h.as_prefix().log_probs_at(h.len()));
        let w = weight * px;
        if jump || drift_condition(log_now, log_at_stop, ctx.eps, ctx.size) {
            let value = log_now.exp();
            seg.expect += w * value;
            if prev > 0.0 && (value / prev - 1.0).abs() > ctx.activity {
                seg.jump_mass += w;
            }
            process_stop(ctx, h, report);
        } else if h.len() < ctx.depth {
            walk_segment(ctx, h, log_at_stop, w, seg, report);
        } else {
            // τ_k = ∞ within the depth: D̃_k = 0
            seg.censored = true;
            if prev > 0.0 {
                seg.jump_mass += w;
            }
        }
        h.pop();
    }
}

/// One-step martingale audit of the raw likelihood ratio.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioMartingaleAudit {
    pub depth: usize,
    /// Nodes with `f(ω^t) > 0` below the depth.
    pub nodes: usize,
    /// Nodes where `E_f[D^{t+1} | ω^t] = D^t` within tolerance.
    pub equality_nodes: usize,
    /// Nodes with an outcome `f` rules out but `g` does not.
    pub zero_successor_nodes: usize,
    /// Zero-successor nodes where the inequality is strict.
    pub strict_zero_successor_nodes: usize,
    /// Largest `|E - D^t|` over nodes without a zero successor.
    pub max_gap_full_support: f64,
    /// Largest `E - D^t` over all nodes.
    pub max_excess: f64,
}

/// Verifies `E_f[D^{t+1} | ω^t] ≤ D^t` at every f-positive node by exact
/// enumeration, with equality when no successor is ruled out by `f` alone.
pub fn audit_ratio_martingale(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    depth: usize,
) -> Result<RatioMartingaleAudit> {
    let mut audit = RatioMartingaleAudit {
        depth,
        max_excess: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut nodes = Vec::new();
    tree::for_each_node(f, g, depth.saturating_sub(1), |h| {
        if h.log_prefix_prob(Seat::First).is_zero() {
            return;
        }
        let mut child = h.clone();
        let (ff, gf) = h.forecasts(f, g);
        let prev = log_ratio(h.as_prefix().log_probs_at(h.len())).exp();
        let mut expect = 0.0;
        let mut zero_successor = false;
        for x in h.alphabet().outcomes() {
            let px = ff.prob(x);
            if px == 0.0 {
                zero_successor |= gf.prob(x) > 0.0;
                continue;
            }
            child.push_step(f, g, x).expect("outcome in alphabet");
            expect += px * log_ratio(child.as_prefix().log_probs_at(child.len())).exp();
            child.pop();
        }
        nodes.push((prev, expect, zero_successor));
    })?;
    for (prev, expect, zero_successor) in nodes {
        let tol = SUPERMARTINGALE_TOL * prev.max(1.0);
        audit.nodes += 1;
        audit.max_excess = audit.max_excess.max(expect - prev);
        if (expect - prev).abs() <= tol {
            audit.equality_nodes += 1;
        }
        if zero_successor {
            audit.zero_successor_nodes += 1;
            if expect < prev - tol {
                audit.strict_zero_successor_nodes += 1;
            }
        } else {
            audit.max_gap_full_support = audit.max_gap_full_support.max((expect - prev).abs());
        }
    }
    if audit.nodes == 0 {
        audit.max_excess = 0.0;
    }
    Ok(audit)
}

/// Empirical `K(ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    pub epsilon: f64,
    pub k: usize,
    pub trials: u64,
    pub horizon: usize,
    pub pair: String,
    /// Fraction of paths with `sup_{k>K} D̃_k < ε`.
    pub coverage: f64,
    /// Fraction of paths with fewer than `K + 1` stopping times.
    pub censored_fraction: f64,
    /// Set when more than 1% of paths never reach `k = K + 1`.
    pub censored: bool,
    /// Set when most paths have fewer than `K + 1` stopping times.
    pub insufficient_activity: bool,
    pub note: String,
}

fn sample_stopped(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    eps: f64,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> Vec<StoppedRatioProcess> {
    let base = TruthProcess::new(NatureLaw::Seat(Seat::First), seed);
    (0..trials)
        .into_par_iter()
        .map(|i| build_stopped_process(&sample_path(&base.with_stream(i), f, g, horizon), eps))
        .collect()
}

/// Least `K` such that the fraction of sampled paths with
/// `sup_{k>K} D̃_k < ε` is at least `1 - ε`. Truth is `f`.
pub fn estimate_k(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    eps: f64,
    trials: u64,
    horizon: usize,
    seed: u64,
) -> Result<KEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {eps} must lie in (0, 1)")));
    }
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 trials, got {trials}")));
    }
    let procs = sample_stopped(f, g, eps, horizon, trials, seed);
    let mut lasts: Vec<usize> = procs.iter().map(|p| p.last_exceedance(eps)).collect();
    lasts.sort_unstable();
    let needed = (((1.0 - eps) * trials as f64) - 1e-9).ceil().max(1.0) as usize;
    let k = lasts[needed - 1];
    let covered = lasts.iter().filter(|&&l| l <= k).count();
    let short = procs.iter().filter(|p| p.stops() < k + 1).count();
    let censored_fraction = short as f64 / trials as f64;
    let censored = censored_fraction > 0.01;
    let insufficient_activity = censored_fraction > 0.5;
    let mut note = String::from("horizon-censored estimate");
    if insufficient_activity {
        note.push_str("; insufficient activity: most paths have fewer than K+1 stopping times");
    } else if censored {
        note.push_str("; more than 1% of paths never reach k = K+1");
    }
    Ok(KEstimate {
        epsilon: eps,
        k,
        trials,
        horizon,
        pair: crate::axioms::pair_id(f, g),
        coverage: covered as f64 / trials as f64,
        censored_fraction,
        censored,
        insufficient_activity,
        note,
    })
}

/// `K̂` over a battery of pairs and their maximum. The maximum is an
/// envelope over the battery only; it does not certify uniformity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEnvelope {
    pub epsilon: f64,
    pub per_pair: Vec<KEstimate>,
    pub envelope: usize,
    pub label: String,
}

pub fn estimate_k_envelope(
    pairs: &[(Strategy, Strategy)],
    eps: f64,
    trials: u64,
    horizon: usize,
    seed: u64,
) -> Result<KEnvelope> {
    let per_pair = pairs
        .iter()
        .enumerate()
        .map(|(i, (f, g))| estimate_k(&**f, &**g, eps, trials, horizon, derive_seed(seed, &format!("pair{i}"))))
        .collect::<Result<Vec<_>>>()?;
    let envelope = per_pair.iter().map(|k| k.k).max().unwrap_or(0);
    Ok(KEnvelope {
        epsilon: eps,
        per_pair,
        envelope,
        label: "battery envelope".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// ε-close in all but K periods.
    Close,
    /// 𝒟_n > 1 - ε and stays within ε of 𝒟_n on the audit window.
    Decisive,
    Both,
    Neither,
}

impl Branch {
    pub fn satisfied(self) -> bool {
        self != Branch::Neither
    }
}

/// Per-path record of the dichotomy experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRecord {
    pub far_count: usize,
    #[serde(rename = "D_n")]
    pub d_n: f64,
    pub sup_tail_dev: f64,
    pub branch: Branch,
}

impl DichotomyRecord {
    fn classify(far_count: usize, d_n: f64, sup_tail_dev: f64, k: usize, eps: f64) -> Branch {
        let close = far_count <= k;
        let decisive = d_n > 1.0 - eps && sup_tail_dev < eps;
        match (close, decisive) {
            (true, true) => Branch::Both,
            (true, false) => Branch::Close,
            (false, true) => Branch::Decisive,
            (false, false) => Branch::Neither,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub epsilon: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trials: u64,
    pub fraction: f64,
    pub ci: f64,
    pub records: Vec<DichotomyRecord>,
}

impl DichotomyReport {
    /// Satisfied fraction if the same paths were judged with another `K`.
    pub fn fraction_with_k(&self, k: usize) -> f64 {
        let ok = self
            .records
            .iter()
            .filter(|r| DichotomyRecord::classify(r.far_count, r.d_n, r.sup_tail_dev, k, self.epsilon).satisfied())
            .count();
        ok as f64 / self.records.len().max(1) as f64
    }
}

/// Fraction of f-sampled paths on which either the pair is ε-close in all
/// but `k` of periods `1..=n`, or `𝒟_n > 1-ε` and `|𝒟_t - 𝒟_n| < ε` for
/// every `t` in `[n, n+m]`. `𝒟_t` is the propensity after `t` periods.
#[allow(clippy::too_many_arguments)]
pub fn closeness_dichotomy(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    eps: f64,
    n: usize,
    m: usize,
    trials: u64,
    seed: u64,
    k: usize,
) -> Result<DichotomyReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let base = TruthProcess::new(NatureLaw::Seat(Seat::First), seed);
    let records: Vec<DichotomyRecord> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(&base.with_stream(i), f, g, n + m);
            let far_count = closeness_ledger_upto(&path, eps, n).far_count;
            let d_n = derivative_propensity(path.prefix(n).ratio());
            let sup_tail_dev = (n..=n + m)
                .map(|t| (derivative_propensity(path.prefix(t).ratio()) - d_n).abs())
                .fold(0.0, f64::max);
            DichotomyRecord {
                far_count,
                d_n,
                sup_tail_dev,
                branch: DichotomyRecord::classify(far_count, d_n, sup_tail_dev, k, eps),
            }
        })
        .collect();
    let p = Proportion::from_flags(records.iter().map(|r| r.branch.satisfied()));
    Ok(DichotomyReport {
        epsilon: eps,
        n,
        m,
        k,
        trials,
        fraction: p.estimate(),
        ci: p.ci_half_width(),
        records,
    })
}

/// Per-path record of the ideal-test demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealRecord {
    pub truth: String,
    /// Empirical frequency of outcome 1 along the path.
    pub avg_realization: f64,
    #[serde(rename = "D_final")]
    pub d_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealDemoReport {
    pub a_f: f64,
    pub a_g: f64,
    pub horizon: usize,
    pub delta: f64,
    /// Frequency of `𝒟 > 1-δ` under truth f.
    pub freq_f: f64,
    pub ci_f: f64,
    /// Frequency of `𝒟 < δ` under truth g.
    pub freq_g: f64,
    pub ci_g: f64,
    pub records: Vec<IdealRecord>,
}

/// Two iid forecasters with distinct means are mutually singular; the
/// derivative test separates them under either truth.
pub fn ideal_iid_demo(a_f: f64, a_g: f64, horizon: usize, trials: u64, seed: u64, delta: f64) -> Result<IdealDemoReport> {
    if a_f == a_g {
        return Err(Error::DegeneratePair(format!("a_f = a_g = {a_f}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let f = Iid::new(a_f)?;
    let g = Iid::new(a_g)?;
    let run = |seat: Seat, label: &str| -> Vec<IdealRecord> {
        let base = TruthProcess::new(NatureLaw::Seat(seat), derive_seed(seed, label));
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let path = sample_path(&base.with_stream(i), &f, &g, horizon);
                let ones = path.entries().iter().filter(|e| e.outcome == 1).count();
                IdealRecord {
                    truth: label.to_string(),
                    avg_realization: ones as f64 / horizon.max(1) as f64,
                    d_final: derivative_propensity(path.as_prefix().ratio()),
                }
            })
            .collect()
    };
    let under_f = run(Seat::First, "f");
    let under_g = run(Seat::Second, "g");
    let pf = Proportion::from_flags(under_f.iter().map(|r| r.d_final > 1.0 - delta));
    let pg = Proportion::from_flags(under_g.iter().map(|r| r.d_final < delta));
    let mut records = under_f;
    records.extend(under_g);
    Ok(IdealDemoReport {
        a_f,
        a_g,
        horizon,
        delta,
        freq_f: pf.estimate(),
        ci_f: pf.ci_half_width(),
        freq_g: pg.estimate(),
        ci_g: pg.ci_half_width(),
        records,
    })
}
