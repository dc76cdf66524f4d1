use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

pub const PRESET_NAMES: &[(&str, &str)] = &[
    ("sec5-L-error", "likelihood test error bound violated at ε ∈ {0.6, 0.75, 0.9}"),
    ("sec6-dichotomy", "closeness-or-decisiveness fraction for fair vs iid(0.9)"),
    ("appA-ideal-iid", "derivative test separating iid(0.3) from iid(0.7)"),
    ("appB-crosscalib", "informed vs constant-0.5 expert under iid(0.37), N = 20"),
    ("sec4-Tc-equivalence", "disagreement between T_2 and the derivative test"),
];

fn pair(f: &str, g: &str) -> Option<Vec<[String; 2]>> {
    Some(vec![[f.to_string(), g.to_string()]])
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig {
        name: Some(name.to_string()),
        seed: Some(20240601),
        ..Default::default()
    };
    let cfg = match name {
        "sec5-L-error" => ExperimentConfig {
            kind: Some(ExperimentKind::LError),
            eps_grid: Some(vec![0.6, 0.75, 0.9]),
            horizon: Some(1),
            ..base
        },
        "sec6-dichotomy" => ExperimentConfig {
            kind: Some(ExperimentKind::Dichotomy),
            pairs: pair("fair", "iid:0.9"),
            eps: Some(0.2),
            n: Some(500),
            m: Some(1000),
            trials: Some(10_000),
            k_trials: Some(10_000),
            k_horizon: Some(300),
            stability_seeds: Some(vec![1, 2, 3]),
            ..base
        },
        "appA-ideal-iid" => ExperimentConfig {
            kind: Some(ExperimentKind::IdealDemo),
            a_f: Some(0.3),
            a_g: Some(0.7),
            horizon: Some(2000),
            trials: Some(10_000),
            delta: Some(0.01),
            ..base
        },
        "appB-crosscalib" => ExperimentConfig {
            kind: Some(ExperimentKind::CrossCalib),
            truth: Some("iid:0.37".into()),
            experts: Some(vec!["iid:0.37".into(), "iid:0.5".into()]),
            grid: Some(20),
            horizon: Some(100_000),
            m_min: Some(30),
            delta: Some(0.01),
            ..base
        },
        "sec4-Tc-equivalence" => ExperimentConfig {
            kind: Some(ExperimentKind::Equivalence),
            pairs: pair("fair", "delta:1"),
            tests: Some(vec!["Tc:2".into(), "D".into()]),
            horizon: Some(3),
            trials: Some(10_000),
            delta: Some(0.01),
            ..base
        },
        _ => return Err(Error::UnknownPreset(name.into())),
    };
    Ok(cfg)
}
