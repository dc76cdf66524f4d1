use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{AxiomMode, ExperimentConfig, ExperimentKind};
use crate::axioms::{
    default_eps_grid, equivalence_probe, error_free_from_table, l_test_unbounded_error, monte_carlo_error_free,
    pair_id, reasonable_from_table, Axiom, AxiomReport, LeafTable, SetFamily,
};
use crate::calibration::{run_cross_calibration, IntervalGrid, DEFAULT_DELTA, DEFAULT_M_MIN};
use crate::comparison::{parse_test, trajectory, Test};
use crate::convergence::{
    audit_ratio_martingale, estimate_k, ideal_iid_demo, closeness_dichotomy, verify_active_supermartingale,
    KEstimate,
};
use crate::error::{Error, Result};
use crate::forecast::OutcomePrefix;
use crate::history::{PlayHistory, Seat};
use crate::sampling::{derive_seed, sample_path, NatureLaw, TruthProcess};
use crate::strategy::parse_strategy;
use crate::tree;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub kind: String,
    pub seed: u64,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// Every file the run wrote, relative to the output directory.
    pub files: Vec<String>,
}

/// A pass/fail statement a run makes about its own results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn jsonl<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut buf = Vec::new();
        for r in rows {
            serde_json::to_writer(&mut buf, &r).expect("row serializes");
            buf.push(b'\n');
        }
        self.write(name, &buf)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut buf = serde_json::to_vec_pretty(value).expect("value serializes");
        buf.push(b'\n');
        self.write(name, &buf)
    }

    fn text(&mut self, name: &str, s: &str) -> Result<()> {
        self.write(name, s.as_bytes())
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Writes `bytes` to a temporary sibling, then renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Validates `config`, runs it and writes artifacts plus the manifest to `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let kind = config.kind()?;
    let seed = config.seed()?;
    let started = now_ms();
    let mut art = Artifacts::new(out)?;
    let (checks, summary) = match kind {
        ExperimentKind::Axioms => run_axioms(config, seed, &mut art)?,
        ExperimentKind::LError => run_l_error(config, &mut art)?,
        ExperimentKind::EstimateK => run_estimate_k(config, seed, &mut art)?,
        ExperimentKind::Dichotomy => run_dichotomy(config, seed, &mut art)?,
        ExperimentKind::IdealDemo => run_ideal(config, seed, &mut art)?,
        ExperimentKind::CrossCalib => run_cross_calib(config, seed, &mut art)?,
        ExperimentKind::Trajectory => run_trajectory(config, seed, &mut art)?,
        ExperimentKind::Equivalence => run_equivalence(config, seed, &mut art)?,
        ExperimentKind::Martingale => run_martingale(config, &mut art)?,
    };
    art.json("checks.json", &checks)?;
    let manifest = RunManifest {
        config_hash: config.hash(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.as_str().to_string(),
        seed,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        files: art.files.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&out.join(MANIFEST_FILE), &bytes)?;
    Ok(RunOutcome {
        manifest,
        checks,
        summary,
    })
}

type KindResult = Result<(Vec<Check>, serde_json::Value)>;

fn run_axioms(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let pairs = c.strategy_pairs()?;
    let horizon = c.req(&c.horizon, "horizon")?;
    let grid = c.eps_grid.clone().unwrap_or_else(default_eps_grid);
    let mut reports: Vec<AxiomReport> = Vec::new();
    for id in c.test_ids() {
        let test = parse_test(&id)?;
        for (i, (f, g)) in pairs.iter().enumerate() {
            match c.mode.unwrap_or_default() {
                AxiomMode::Exact => {
                    let table = LeafTable::build(&*test, &**f, &**g, horizon)?;
                    let pair = pair_id(&**f, &**g);
                    reports.push(error_free_from_table(&table, &id, &pair, &grid, &SetFamily::Standard)?);
                    reports.push(reasonable_from_table(&table, &id, &pair, &grid, &SetFamily::Standard)?);
                }
                AxiomMode::MonteCarlo => {
                    let trials = c.req(&c.trials, "trials")?;
                    let s = derive_seed(seed, &format!("{id}/{i}"));
                    reports.push(monte_carlo_error_free(&*test, &**f, &**g, horizon, &grid, trials, s)?);
                }
            }
        }
    }
    art.jsonl("axioms.jsonl", reports.iter().flat_map(|r| r.rows.iter()))?;
    let mut checks = Vec::new();
    let mut summary = Vec::new();
    for r in &reports {
        let axiom = r.rows.first().map(|x| x.axiom).unwrap_or(Axiom::ErrorFree);
        summary.push(json!({
            "test": r.test, "pair": r.pair, "axiom": axiom, "violations": r.violations,
            "worst_violation": r.worst_violation, "mode": r.mode,
        }));
        let name = format!("{} {:?} {}", r.test, axiom, r.pair);
        if r.test == "D" {
            checks.push(Check::new(name, r.violations == 0, format!("{} violations", r.violations)));
        }
    }
    let summary = serde_json::Value::Array(summary);
    art.json("summary.json", &summary)?;
    Ok((checks, summary))
}

fn run_l_error(c: &ExperimentConfig, art: &mut Artifacts) -> KindResult {
    let grid = c.eps_grid.clone().unwrap_or_else(|| vec![0.6, 0.75, 0.9]);
    let rows = l_test_unbounded_error(&grid, c.horizon.unwrap_or(1))?;
    art.jsonl("l_error.jsonl", &rows)?;
    let mut csv = String::from("eps,lhs,f_mass,bound,ratio,l_verdict\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},{},{}\n", r.eps, r.lhs, r.f_mass, r.bound, r.ratio, r.l_verdict));
    }
    art.text("l_error.csv", &csv)?;
    let checks = rows
        .iter()
        .map(|r| Check::new(format!("L error bound exceeded at eps={}", r.eps), r.ratio > 1.0, format!("ratio {}", r.ratio)))
        .collect();
    Ok((checks, serde_json::to_value(&rows).expect("rows serialize")))
}

#[derive(Serialize)]
struct KRow<'a> {
    seed: u64,
    #[serde(flatten)]
    estimate: &'a KEstimate,
}

fn stability_check(name: &str, ks: &[usize]) -> Check {
    let (lo, hi) = (ks.iter().min().copied().unwrap_or(0), ks.iter().max().copied().unwrap_or(0));
    Check::new(name, hi - lo <= 1, format!("K over seeds: {ks:?}"))
}

fn run_estimate_k(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let pairs = c.strategy_pairs()?;
    let eps = c.req(&c.eps, "eps")?;
    let trials = c.req(&c.trials, "trials")?;
    let horizon = c.req(&c.horizon, "horizon")?;
    let mut seeds = vec![seed];
    seeds.extend(c.stability_seeds.iter().flatten());
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (f, g) in &pairs {
        let ests = seeds
            .iter()
            .map(|&s| estimate_k(&**f, &**g, eps, trials, horizon, s).map(|e| (s, e)))
            .collect::<Result<Vec<_>>>()?;
        if seeds.len() > 1 {
            let ks: Vec<usize> = ests.iter().map(|(_, e)| e.k).collect();
            checks.push(stability_check(&format!("K seed stability {}", pair_id(&**f, &**g)), &ks));
        }
        rows.extend(ests);
    }
    art.jsonl("estimate_k.jsonl", rows.iter().map(|(s, e)| KRow { seed: *s, estimate: e }))?;
    let summary = serde_json::to_value(rows.iter().map(|(s, e)| KRow { seed: *s, estimate: e }).collect::<Vec<_>>())
        .expect("rows serialize");
    Ok((checks, summary))
}

fn run_dichotomy(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let (f, g) = c.strategy_pairs()?.swap_remove(0);
    let eps = c.req(&c.eps, "eps")?;
    let n = c.req(&c.n, "n")?;
    let m = c.req(&c.m, "m")?;
    let trials = c.req(&c.trials, "trials")?;
    let mut checks = Vec::new();
    let mut k_rows = Vec::new();
    let k = match c.k {
        Some(k) => k,
        None => {
            let k_trials = c.k_trials.unwrap_or(trials);
            let k_horizon = c.k_horizon.unwrap_or(n + m);
            let mut seeds = vec![derive_seed(seed, "k")];
            seeds.extend(c.stability_seeds.iter().flatten());
            for &s in &seeds {
                k_rows.push((s, estimate_k(&*f, &*g, eps, k_trials, k_horizon, s)?));
            }
            if seeds.len() > 1 {
                let ks: Vec<usize> = k_rows.iter().map(|(_, e)| e.k).collect();
                checks.push(stability_check("K seed stability", &ks));
            }
            k_rows[0].1.k
        }
    };
    let report = closeness_dichotomy(&*f, &*g, eps, n, m, trials, derive_seed(seed, "paths"), k)?;
    art.jsonl("dichotomy.jsonl", &report.records)?;
    if !k_rows.is_empty() {
        art.jsonl("estimate_k.jsonl", k_rows.iter().map(|(s, e)| KRow { seed: *s, estimate: e }))?;
    }
    let mut curve = String::from("# k fraction\n");
    for kk in 0..=(2 * k + 10).min(n) {
        curve.push_str(&format!("{kk} {}\n", report.fraction_with_k(kk)));
    }
    art.text("dichotomy_k_curve.dat", &curve)?;
    let threshold = 1.0 - eps - 0.02;
    checks.push(Check::new(
        "dichotomy fraction",
        report.fraction >= threshold,
        format!("fraction {} (ci {}) vs {threshold}, K = {k}", report.fraction, report.ci),
    ));
    let summary = json!({
        "pair": pair_id(&*f, &*g), "epsilon": eps, "n": n, "m": m, "k": k, "trials": trials,
        "fraction": report.fraction, "ci": report.ci,
    });
    art.json("summary.json", &summary)?;
    Ok((checks, summary))
}

fn run_ideal(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let delta = c.delta.unwrap_or(0.01);
    let r = ideal_iid_demo(
        c.req(&c.a_f, "a_f")?,
        c.req(&c.a_g, "a_g")?,
        c.req(&c.horizon, "horizon")?,
        c.req(&c.trials, "trials")?,
        seed,
        delta,
    )?;
    art.jsonl("ideal.jsonl", &r.records)?;
    let summary = json!({
        "a_f": r.a_f, "a_g": r.a_g, "horizon": r.horizon, "delta": delta,
        "freq_f": r.freq_f, "ci_f": r.ci_f, "freq_g": r.freq_g, "ci_g": r.ci_g,
    });
    art.json("summary.json", &summary)?;
    let checks = vec![
        Check::new("decisive under f", r.freq_f >= 1.0 - delta, format!("{}", r.freq_f)),
        Check::new("decisive under g", r.freq_g >= 1.0 - delta, format!("{}", r.freq_g)),
    ];
    Ok((checks, summary))
}

fn run_cross_calib(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let a = c.alphabet()?;
    let truth = parse_strategy(&c.req(&c.truth, "truth")?, a)?;
    let experts = c
        .req(&c.experts, "experts")?
        .iter()
        .map(|e| parse_strategy(e, a))
        .collect::<Result<Vec<_>>>()?;
    let grid = IntervalGrid::with_rule(c.req(&c.grid, "grid")?, c.boundary.unwrap_or_default())?;
    let horizon = c.req(&c.horizon, "horizon")? as u64;
    let r = run_cross_calibration(
        &truth,
        &experts,
        horizon,
        grid,
        seed,
        c.m_min.unwrap_or(DEFAULT_M_MIN),
        c.delta.unwrap_or(DEFAULT_DELTA),
    )?;
    art.text("cross_calib.csv", &r.to_csv())?;
    art.jsonl("cross_calib.jsonl", &r.rows)?;
    let summary = json!({
        "grid": r.grid.n, "horizon": r.horizon, "m_min": r.m_min, "delta": r.delta,
        "truth": r.truth, "verdicts": r.verdicts,
    });
    art.json("summary.json", &summary)?;
    let total = r.counter.total();
    let checks = vec![Check::new("count conservation", total == horizon, format!("Σν = {total}"))];
    Ok((checks, summary))
}

#[derive(Serialize)]
struct TrajRow<'a> {
    test: &'a str,
    t: usize,
    propensity: f64,
    log_f: f64,
    log_g: f64,
}

fn run_trajectory(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let a = c.alphabet()?;
    let (f, g) = c.strategy_pairs()?.swap_remove(0);
    let history = match &c.path {
        Some(digits) => {
            let outcomes = OutcomePrefix::parse_digits(digits, a)?;
            PlayHistory::replay(a, &*f, &*g, outcomes.as_slice())?
        }
        None => {
            let truth = TruthProcess::new(NatureLaw::Seat(c.truth_seat()), seed);
            sample_path(&truth, &*f, &*g, c.req(&c.horizon, "horizon")?)
        }
    };
    let tests: Vec<(String, Test)> = c
        .test_ids()
        .into_iter()
        .map(|id| parse_test(&id).map(|t| (id, t)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut plot = String::from("# test t propensity\n");
    for (id, test) in &tests {
        let tr = trajectory(&**test, &history);
        let values = tr.propensities.iter().copied().chain(std::iter::once(tr.terminal));
        for (t, p) in values.enumerate() {
            let logs = history.as_prefix().log_probs_at(t);
            plot.push_str(&format!("{id} {t} {p}\n"));
            rows.push(TrajRow {
                test: id,
                t,
                propensity: p,
                log_f: logs[0],
                log_g: logs[1],
            });
        }
    }
    let in_range = rows.iter().all(|r| (0.0..=1.0).contains(&r.propensity));
    art.jsonl("trajectory.jsonl", &rows)?;
    art.text("trajectory.dat", &plot)?;
    let summary = json!({
        "pair": pair_id(&*f, &*g), "outcomes": history.outcomes().to_string(),
        "tests": tests.iter().map(|(id, _)| id).collect::<Vec<_>>(),
    });
    art.json("summary.json", &summary)?;
    Ok((vec![Check::new("propensities in [0,1]", in_range, "")], summary))
}

fn run_equivalence(c: &ExperimentConfig, seed: u64, art: &mut Artifacts) -> KindResult {
    let ids = c.test_ids();
    let (ta, tb) = (parse_test(&ids[0])?, parse_test(&ids[1])?);
    let horizon = c.req(&c.horizon, "horizon")?;
    let trials = c.req(&c.trials, "trials")?;
    let delta = c.delta.unwrap_or(0.01);
    let truth = c.truth_seat();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (i, (f, g)) in c.strategy_pairs()?.iter().enumerate() {
        let d = equivalence_probe(&*ta, &*tb, &**f, &**g, truth, horizon, trials, derive_seed(seed, &i.to_string()), delta)?;
        // exact disagreement mass where the tree is small enough
        let mut exact = None;
        if tree::leaf_count(f.alphabet(), horizon).is_ok_and(|n| n <= 1 << 16) {
            let mut mass = 0.0;
            tree::for_each_leaf(&**f, &**g, horizon, |h| {
                if (ta.propensity(h.as_prefix()) - tb.propensity(h.as_prefix())).abs() > delta {
                    mass += h.log_prefix_prob(truth).prob();
                }
            })?;
            exact = Some(mass);
        }
        if let Some(p) = exact {
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            checks.push(Check::new(
                format!("disagreement matches exact mass {}", pair_id(&**f, &**g)),
                (d.estimate - p).abs() <= 4.0 * sd + 1e-12,
                format!("estimate {} vs exact {p}", d.estimate),
            ));
        }
        rows.push(json!({
            "tests": [ids[0], ids[1]], "pair": pair_id(&**f, &**g), "horizon": horizon,
            "truth": if truth == Seat::First { "first" } else { "second" },
            "estimate": d.estimate, "ci": d.ci, "trials": d.trials, "delta": d.delta, "exact": exact,
        }));
    }
    art.jsonl("equivalence.jsonl", &rows)?;
    Ok((checks, serde_json::Value::Array(rows)))
}

fn run_martingale(c: &ExperimentConfig, art: &mut Artifacts) -> KindResult {
    let depth = c.req(&c.horizon, "horizon")?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (f, g) in c.strategy_pairs()? {
        let pair = pair_id(&*f, &*g);
        let audit = audit_ratio_martingale(&*f, &*g, depth)?;
        let tol = crate::convergence::SUPERMARTINGALE_TOL;
        checks.push(Check::new(
            format!("ratio supermartingale {pair}"),
            audit.max_excess <= tol && audit.max_gap_full_support <= tol,
            format!("max excess {}, full-support gap {}", audit.max_excess, audit.max_gap_full_support),
        ));
        checks.push(Check::new(
            format!("strict at zero successors {pair}"),
            audit.strict_zero_successor_nodes == audit.zero_successor_nodes,
            format!("{}/{}", audit.strict_zero_successor_nodes, audit.zero_successor_nodes),
        ));
        let active = match c.eps {
            Some(eps) => {
                let r = verify_active_supermartingale(&*f, &*g, eps, depth)?;
                checks.push(Check::new(
                    format!("active supermartingale {pair}"),
                    r.passed(),
                    format!("{} failures, {} activity failures", r.supermartingale_failures, r.activity_failures),
                ));
                Some(r)
            }
            None => None,
        };
        rows.push(json!({ "pair": pair, "audit": audit, "active": active }));
    }
    art.jsonl("martingale.jsonl", &rows)?;
    Ok((checks, serde_json::Value::Array(rows)))
}
