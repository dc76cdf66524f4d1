use std::fs;
use std::process::{Command, Output};

fn cardinal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cardinal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_registries() {
    let o = cardinal(&["list-strategies"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("copycat-after:k"));
    let o = cardinal(&["list-tests"]);
    assert!(stdout(&o).contains("Tc:c"));
    let o = cardinal(&["list-presets"]);
    assert!(stdout(&o).contains("appB-crosscalib"));
}

#[test]
fn run_trajectory_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("traj.toml");
    fs::write(&cfg, "kind = \"trajectory\"\nseed = 3\npairs = [[\"fair\", \"delta:1\"]]\npath = \"110\"\n").unwrap();
    let out = dir.path().join("out");
    let o = cardinal(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--check"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
    let rows = fs::read_to_string(out.join("trajectory.jsonl")).unwrap();
    let last: serde_json::Value = serde_json::from_str(rows.lines().last().unwrap()).unwrap();
    assert_eq!(last["propensity"], 1.0);
}

#[test]
fn invalid_strategy_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "kind = \"trajectory\"\nseed = 3\nhorizon = 4\npairs = [[\"fair\", \"oracle\"]]\n").unwrap();
    let o = cardinal(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = cardinal(&["preset", "no-such-preset"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_exit_3() {
    let o = cardinal(&["run", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failing_check_is_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ideal.toml");
    // one period cannot separate iid(0.3) from iid(0.7)
    fs::write(&cfg, "kind = \"ideal-demo\"\nseed = 1\na_f = 0.3\na_g = 0.7\nhorizon = 1\ntrials = 50\n").unwrap();
    let out = dir.path().join("o");
    let o = cardinal(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--check"]);
    assert_eq!(o.status.code(), Some(4));
    let o = cardinal(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn preset_print_round_trips() {
    let o = cardinal(&["preset", "sec5-L-error", "--print"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("kind = \"l-error\""));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l");
    let o = cardinal(&["preset", "sec5-L-error", "--out", out.to_str().unwrap(), "--check"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS"));
    assert!(out.join("l_error.csv").exists());
}

#[test]
fn cross_calib_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cc.csv");
    let o = cardinal(&[
        "cross-calib", "--truth", "iid:0.37", "--experts", "iid:0.37,iid:0.5", "--N", "20", "--T", "20000",
        "--seed", "7", "--csv", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("forecaster,profile,nu,freq,target,dev,audited,pass"));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("PASS expert 0"));
    assert!(err.contains("FAIL expert 1"));
}
