//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::time::{Duration, Instant};

use cardinal_core::axioms::{check_error_free_exact, SetFamily};
use cardinal_core::comparison::H2Counterexample;
use cardinal_core::convergence::jump_condition;
use cardinal_core::experiments::{preset, run, ExperimentConfig, ExperimentKind, RunOutcome};
use cardinal_core::strategy::Scripted;
use cardinal_core::tree::for_each_node;
use cardinal_core::{parse_strategy, Alphabet, Forecast, OutcomePrefix, Strategy};
use serde_json::Value;

const SEED: u64 = 20240601;

/// What a criterion reports: verdict, a one-line detail and every JSONL
/// line it produced (compared byte-for-byte on re-run).
struct Verdict {
    pass: bool,
    detail: String,
    jsonl: Vec<u8>,
}

fn s(id: &str) -> Strategy {
    parse_strategy(id, Alphabet::BINARY).unwrap()
}

fn seeded_pairs() -> Vec<[String; 2]> {
    (0..5)
        .map(|i| [format!("seeded-random:{}", 2 * i + 1), format!("seeded-random:{}", 2 * i + 2)])
        .collect()
}

fn base(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        kind: Some(kind),
        seed: Some(SEED),
        ..Default::default()
    }
}

/// Runs a config in a fresh directory and collects its JSONL bytes.
fn run_collect(cfg: &ExperimentConfig, jsonl: &mut Vec<u8>) -> RunOutcome {
    let dir = tempfile::tempdir().unwrap();
    let out = run(cfg, dir.path()).unwrap();
    for f in &out.manifest.files {
        if f.ends_with(".jsonl") {
            jsonl.extend(fs::read(dir.path().join(f)).unwrap());
        }
    }
    out
}

fn rows(dir_jsonl: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(dir_jsonl)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn c1() -> Verdict {
    let mut jsonl = Vec::new();
    let mut cfg = base(ExperimentKind::Trajectory);
    cfg.pairs = Some(vec![["fair".into(), "delta:1".into()]]);
    cfg.path = Some("1".repeat(30));
    let mut own = Vec::new();
    run_collect(&cfg, &mut own);
    let mut max_err: f64 = 0.0;
    for r in rows(&own) {
        let t = r["t"].as_u64().unwrap() as i32;
        let p = r["propensity"].as_f64().unwrap();
        max_err = max_err.max((p - 1.0 / (1.0 + 2f64.powi(t))).abs());
    }
    jsonl.extend(own);

    // a zero at period 4 rules the second forecaster out from then on
    cfg.path = Some("1110111011".into());
    let mut own = Vec::new();
    run_collect(&cfg, &mut own);
    let after_zero = rows(&own)
        .iter()
        .filter(|r| r["t"].as_u64().unwrap() >= 4)
        .all(|r| r["propensity"].as_f64().unwrap() == 1.0);
    jsonl.extend(own);
    Verdict {
        pass: max_err <= 1e-12 && after_zero,
        detail: format!("max abs error {max_err:.2e}, 1 after a zero: {after_zero}"),
        jsonl,
    }
}

fn axioms_summary(test: &str, jsonl: &mut Vec<u8>) -> Vec<Value> {
    let mut cfg = base(ExperimentKind::Axioms);
    cfg.pairs = Some(seeded_pairs());
    cfg.horizon = Some(10);
    cfg.tests = Some(vec![test.into()]);
    run_collect(&cfg, jsonl).summary.as_array().unwrap().clone()
}

fn count(summary: &[Value], axiom: &str) -> (u64, f64) {
    summary
        .iter()
        .filter(|r| r["axiom"] == axiom)
        .fold((0, 0.0), |(n, w), r| {
            (n + r["violations"].as_u64().unwrap(), w.max(r["worst_violation"].as_f64().unwrap()))
        })
}

fn c2() -> Verdict {
    let mut jsonl = Vec::new();
    let summary = axioms_summary("D", &mut jsonl);
    let (n, worst) = count(&summary, "error-free");
    let rows = rows(&jsonl).iter().filter(|r| r["axiom"] == "error-free").count();
    Verdict {
        pass: n == 0 && rows == 5 * 18 * 1027,
        detail: format!("{n} violations over {rows} (pair, ε, A) rows, worst {worst:.1e}"),
        jsonl,
    }
}

fn c3() -> Verdict {
    let mut jsonl = Vec::new();
    let summary = axioms_summary("D", &mut jsonl);
    let (n, _) = count(&summary, "reasonable");
    let premises = rows(&jsonl)
        .iter()
        .filter(|r| r["axiom"] == "reasonable" && r["premise"] == true)
        .count();
    Verdict {
        pass: n == 0 && premises > 0,
        detail: format!("{n} violations among {premises} premise-satisfying (pair, ε, A)"),
        jsonl,
    }
}

fn c4() -> Verdict {
    let mut jsonl = Vec::new();
    // (a) constant fair test
    let fair = axioms_summary("fair", &mut jsonl);
    let (fair_ef, _) = count(&fair, "error-free");
    let (fair_re, _) = count(&fair, "reasonable");
    let a_ok = fair_ef == 0 && fair_re >= 1;

    // (b) likelihood test
    let mut cfg = preset("sec5-L-error").unwrap();
    cfg.seed = Some(SEED);
    let mut own = Vec::new();
    run_collect(&cfg, &mut own);
    let ratio_at = |eps: f64| {
        rows(&own)
            .iter()
            .find(|r| (r["eps"].as_f64().unwrap() - eps).abs() < 1e-12)
            .map(|r| r["ratio"].as_f64().unwrap())
            .unwrap()
    };
    let (r75, r90) = (ratio_at(0.75), ratio_at(0.9));
    jsonl.extend(own);
    let l = axioms_summary("L", &mut jsonl);
    let (l_re, _) = count(&l, "reasonable");
    let b_ok = r75 > 10.0 && r90 > 80.0 && l_re == 0;

    // (c) h2 on its trigger path
    let a = Alphabet::BINARY;
    let f = s("delta:1");
    let g = Scripted::new(vec![Forecast::uniform(a)], s("delta:1"));
    let family = SetFamily::Custom(vec![("omega~".into(), vec![OutcomePrefix::from(vec![1; 5])])]);
    let rep = check_error_free_exact(&H2Counterexample::new(), &*f, &g, 5, &[1.0 / 3.0], &family).unwrap();
    let row = &rep.rows[0];
    for r in &rep.rows {
        serde_json::to_writer(&mut jsonl, r).unwrap();
        jsonl.push(b'\n');
    }
    let c_ok = row.lhs == 1.0 && (row.rhs - 0.25).abs() < 1e-15 && row.lhs > row.rhs;

    Verdict {
        pass: a_ok && b_ok && c_ok,
        detail: format!(
            "fair: {fair_ef} error-free / {fair_re} reasonableness violations; \
             L: ratio {r75:.3} at 0.75, {r90:.3} at 0.9, {l_re} reasonableness violations; \
             h2: f(A∩R) = {} vs ½·g(A) = {}",
            row.lhs, row.rhs
        ),
        jsonl,
    }
}

fn martingale_rows(pairs: Vec<[String; 2]>, depth: usize, eps: Option<f64>, jsonl: &mut Vec<u8>) -> (RunOutcome, Vec<Value>) {
    let mut cfg = base(ExperimentKind::Martingale);
    cfg.pairs = Some(pairs);
    cfg.horizon = Some(depth);
    cfg.eps = eps;
    let mut own = Vec::new();
    let out = run_collect(&cfg, &mut own);
    let r = rows(&own);
    jsonl.extend(own);
    (out, r)
}

fn c5() -> Verdict {
    let mut jsonl = Vec::new();
    let full: Vec<[String; 2]> = vec![
        ["seeded-random:21".into(), "seeded-random:22".into()],
        ["fair".into(), "iid:0.9".into()],
        ["iid:0.3".into(), "seeded-random:23".into()],
    ];
    let mut pairs = full.clone();
    pairs.push(["fair".into(), "delta:1".into()]);
    pairs.push(["delta:1".into(), "fair".into()]);
    let (_, r) = martingale_rows(pairs, 8, None, &mut jsonl);
    let audit = |i: usize, k: &str| r[i]["audit"][k].clone();
    let equal_ok = (0..4).all(|i| audit(i, "max_gap_full_support").as_f64().unwrap() <= 1e-10
        && audit(i, "equality_nodes") == audit(i, "nodes"));
    let fa_zero = audit(3, "zero_successor_nodes").as_u64().unwrap();
    let sw_zero = audit(4, "zero_successor_nodes").as_u64().unwrap();
    let sw_strict = audit(4, "strict_zero_successor_nodes").as_u64().unwrap();
    let strict_ok = sw_zero > 0 && sw_strict == sw_zero && audit(4, "nodes").as_u64() == Some(sw_zero);
    Verdict {
        pass: equal_ok && strict_ok,
        detail: format!(
            "equality at every node for the full-support pairs; (fair, always-1): {fa_zero} zero-successor nodes; \
             (always-1, fair): strict at {sw_strict}/{sw_zero}"
        ),
        jsonl,
    }
}

fn c6() -> Verdict {
    let mut jsonl = Vec::new();
    let (out, r) = martingale_rows(vec![["fair".into(), "iid:0.9".into()]], 8, Some(0.2), &mut jsonl);
    let active = &r[0]["active"];
    let (f, g) = (s("fair"), s("iid:0.9"));
    let mut fired = 0;
    let mut nodes = 0;
    for_each_node(&*f, &*g, 7, |h| {
        let (x, y) = h.forecasts(&*f, &*g);
        nodes += 1;
        fired += jump_condition(&x, &y, 0.2) as usize;
    })
    .unwrap();
    let pass = fired == nodes
        && active["nodes_checked"].as_u64() == Some(255)
        && active["activity_checked"] == active["nodes_checked"]
        && active["activity_failures"] == 0
        && active["supermartingale_failures"] == 0
        && out.all_passed();
    Verdict {
        pass,
        detail: format!(
            "jump condition at {fired}/{nodes} nodes; activity checked at {} nodes, {} failures, min margin {}",
            active["activity_checked"], active["activity_failures"], active["min_activity_margin"]
        ),
        jsonl,
    }
}

fn c7() -> Verdict {
    let mut jsonl = Vec::new();
    let cfg = preset("sec6-dichotomy").unwrap();
    let out = run_collect(&cfg, &mut jsonl);
    let ks: Vec<u64> = rows(&jsonl)
        .iter()
        .filter_map(|r| r.get("k").and_then(Value::as_u64))
        .collect();
    let fraction = out.summary["fraction"].as_f64().unwrap();
    Verdict {
        pass: out.all_passed() && ks.len() == 4,
        detail: format!("fraction {fraction:.4} (≥ {:.2} needed), K over seeds {ks:?}", 1.0 - 0.2 - 0.02),
        jsonl,
    }
}

fn c8() -> Verdict {
    let mut jsonl = Vec::new();
    let out = run_collect(&preset("appA-ideal-iid").unwrap(), &mut jsonl);
    Verdict {
        pass: out.all_passed(),
        detail: format!("𝒟 > 0.99 under f: {}, 𝒟 < 0.01 under g: {}", out.summary["freq_f"], out.summary["freq_g"]),
        jsonl,
    }
}

fn c9() -> Verdict {
    let mut jsonl = Vec::new();
    let mut verdicts = Vec::new();
    let mut conserved = true;
    for n in [10, 20] {
        let mut cfg = preset("appB-crosscalib").unwrap();
        cfg.grid = Some(n);
        let out = run_collect(&cfg, &mut jsonl);
        conserved &= out.all_passed();
        let v = out.summary["verdicts"].as_array().unwrap();
        verdicts.push((n, v[0]["pass"].as_bool().unwrap(), v[1]["pass"].as_bool().unwrap()));
    }
    let pass = conserved && verdicts.iter().all(|v| v.1) && !verdicts[1].2;
    Verdict {
        pass,
        detail: format!("(N, informed passes, constant passes) = {verdicts:?}; Σν = T: {conserved}"),
        jsonl,
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

const CRITERIA: [Criterion; 9] = [
    (1, "closed-form trajectory", Duration::from_secs(1), c1),
    (2, "exact error-freeness of the derivative test", Duration::from_secs(30), c2),
    (3, "exact reasonableness of the derivative test", Duration::from_secs(30), c3),
    (4, "independence of the axioms", Duration::from_secs(10), c4),
    (5, "likelihood ratio martingale identity", Duration::from_secs(20), c5),
    (6, "active supermartingale", Duration::from_secs(20), c6),
    (7, "closeness-or-decisiveness dichotomy", Duration::from_secs(120), c7),
    (8, "ideal test for distinct iid forecasters", Duration::from_secs(60), c8),
    (9, "cross-calibration", Duration::from_secs(30), c9),
];

fn main() {
    // `cargo test -- --list` and filters are passed through; honour --list.
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _, _) in CRITERIA {
            println!("criterion_{id}: test  # {name}");
        }
        return;
    }
    let mut failed = 0;
    let mut first_outputs = Vec::new();
    for (id, name, budget, f) in CRITERIA {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let ok = v.pass && took <= budget;
        failed += !ok as u32;
        println!(
            "{} criterion {id}: {name} [{:.2}s / {}s] {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            v.detail
        );
        first_outputs.push(v.jsonl);
    }
    let mut mismatched = Vec::new();
    for ((id, _, _, f), first) in CRITERIA.iter().zip(&first_outputs) {
        if f().jsonl != *first {
            mismatched.push(*id);
        }
    }
    let bytes: usize = first_outputs.iter().map(Vec::len).sum();
    let ok = mismatched.is_empty();
    failed += !ok as u32;
    println!(
        "{} criterion 10: reproducibility [{bytes} JSONL bytes re-generated] mismatched criteria: {mismatched:?}",
        if ok { "PASS" } else { "FAIL" }
    );
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
