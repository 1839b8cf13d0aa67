use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn caosr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caosr"))
        .args(args)
        .env_remove("CAOSR_OUT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in ["default.scn", "two_node.scn"] {
        let o = caosr(&["validate", "--scenario", scenario(name).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: "));
    }
}

#[test]
fn bad_scenario_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    let text = fs::read_to_string(scenario("two_node.scn")).unwrap();
    fs::write(&path, text.replacen("[run]", "[run]\nbogus_key = 1", 1)).unwrap();
    let o = caosr(&["validate", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&caosr(&[])), 1);
    assert_eq!(code(&caosr(&["preset", "fig99"])), 1);
    assert_eq!(
        code(&caosr(&["validate", "--scenario", "/nonexistent.scn"])),
        1
    );
    assert_eq!(code(&caosr(&["preset", "fig10", "--replicates", "0"])), 1);
}

#[test]
fn run_writes_outputs_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = caosr(&[
        "run",
        "--scenario",
        scenario("two_node.scn").to_str().unwrap(),
        "--seed",
        "99",
        "--messages",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "metrics.csv",
        "contacts.csv",
        "scenario.scn",
        "messages.bin",
        "manifest.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "seed=99"));
    let contacts = fs::read_to_string(out.join("contacts.csv")).unwrap();
    assert_eq!(contacts.lines().count(), 2);
}

#[test]
fn out_dir_falls_back_to_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_caosr"))
        .args([
            "run",
            "--scenario",
            scenario("two_node.scn").to_str().unwrap(),
        ])
        .env("CAOSR_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn preset_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.scn");
    let text = fs::read_to_string(scenario("default.scn")).unwrap();
    fs::write(&base, text.replacen("duration = 120s", "duration = 20s", 1)).unwrap();
    let o = caosr(&[
        "preset",
        "fig16",
        "--scenario",
        base.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("fig16.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,failure_pct"));
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("preset=fig16"));
}
