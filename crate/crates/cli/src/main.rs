use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cardinal_core::calibration::{run_cross_calibration, BoundaryRule, IntervalGrid, DEFAULT_DELTA, DEFAULT_M_MIN};
use cardinal_core::comparison::TEST_IDS;
use cardinal_core::experiments::{preset, run, ExperimentConfig, RunOutcome, PRESET_NAMES};
use cardinal_core::strategy::STRATEGY_IDS;
use cardinal_core::{parse_strategy, Alphabet, Error};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(name = "cardinal", version, about = "Compare sequential probabilistic forecasters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Exit with status 4 if any of the run's checks fails.
        #[arg(long)]
        check: bool,
    },
    /// Run a bundled preset.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        check: bool,
        /// Print the preset's config as TOML instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// List presets.
    ListPresets,
    /// List strategy registry ids.
    ListStrategies,
    /// List comparison test ids.
    ListTests,
    /// Cross-calibration of several binary experts.
    CrossCalib {
        #[arg(long)]
        truth: String,
        /// Comma-separated strategy ids.
        #[arg(long, value_delimiter = ',', required = true)]
        experts: Vec<String>,
        #[arg(long = "N", default_value_t = 10)]
        n: usize,
        #[arg(long = "T", default_value_t = 100_000)]
        t: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_M_MIN)]
        m_min: u64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Boundary::Lower)]
        boundary: Boundary,
        /// Write the profile table here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Lower,
    Upper,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_IO })
        }
    }
}

fn default_out(cfg: &ExperimentConfig) -> PathBuf {
    let label = cfg
        .name
        .clone()
        .or_else(|| cfg.kind.map(|k| k.as_str().to_string()))
        .unwrap_or_else(|| "run".into());
    Path::new("runs").join(label)
}

fn execute(mut cfg: ExperimentConfig, out: Option<PathBuf>, seed: Option<u64>, check: bool) -> Result<ExitCode, Error> {
    if seed.is_some() {
        cfg.seed = seed;
    }
    let out = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| default_out(&cfg));
    let outcome = run(&cfg, &out)?;
    report(&outcome, &out);
    if check && !outcome.all_passed() {
        return Ok(ExitCode::from(EXIT_CHECK));
    }
    Ok(ExitCode::SUCCESS)
}

fn report(outcome: &RunOutcome, out: &Path) {
    println!("{} run written to {}", outcome.manifest.kind, out.display());
    for c in &outcome.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {} {}", c.name, c.detail);
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Run { config, out, seed, check } => execute(ExperimentConfig::from_file(&config)?, out, seed, check),
        Command::Preset {
            name,
            out,
            seed,
            check,
            print,
        } => {
            let cfg = preset(&name)?;
            if print {
                print!("{}", cfg.to_toml_string()?);
                return Ok(ExitCode::SUCCESS);
            }
            execute(cfg, out, seed, check)
        }
        Command::ListPresets => {
            for (name, about) in PRESET_NAMES {
                println!("{name:<22} {about}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListStrategies => {
            for (id, about) in STRATEGY_IDS {
                println!("{id:<22} {about}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListTests => {
            for (id, about) in TEST_IDS {
                println!("{id:<22} {about}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CrossCalib {
            truth,
            experts,
            n,
            t,
            seed,
            m_min,
            delta,
            boundary,
            csv,
        } => {
            let a = Alphabet::BINARY;
            let truth = parse_strategy(&truth, a)?;
            let experts = experts.iter().map(|e| parse_strategy(e, a)).collect::<Result<Vec<_>, _>>()?;
            let rule = match boundary {
                Boundary::Lower => BoundaryRule::Lower,
                Boundary::Upper => BoundaryRule::Upper,
            };
            let grid = IntervalGrid::with_rule(n, rule)?;
            let r = run_cross_calibration(&truth, &experts, t, grid, seed, m_min, delta)?;
            match csv {
                Some(path) => std::fs::write(&path, r.to_csv()).map_err(|e| Error::Io { path, source: e })?,
                None => print!("{}", r.to_csv()),
            }
            for v in &r.verdicts {
                let status = if v.pass { "PASS" } else { "FAIL" };
                eprintln!("{status} expert {} ({}) audited profiles: {}", v.index, v.id, v.audited_profiles);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
