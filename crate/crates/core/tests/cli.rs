use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gclab(args: &[&str], out: Option<&Path>, env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gclab"));
    cmd.args(args).env_remove("GCLAB_OUT");
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    if let Some(e) = env_out {
        cmd.env("GCLAB_OUT", e);
    }
    cmd.output().expect("spawn gclab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))).unwrap()
}

#[test]
fn commutator_single_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = gclab(&["commutator", "--identity", "I1", "--assert"], Some(dir.path()), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("commutator/summary.json"));
    let ids = s["result"]["identities"].as_array().unwrap();
    assert_eq!(ids.len(), 1);
    assert_eq!(ids[0]["name"], "I1");
    assert_eq!(ids[0]["residual_monomials"], 0);
    let rec = json(&dir.path().join("commutator/record.json"));
    assert_eq!(rec["status"], "pass");
    assert_eq!(rec["config"]["identity"], "I1");
    assert!(dir.path().join("commutator/identities.csv").exists());
}

#[test]
fn convexity_passes_with_assert() {
    let dir = tempfile::tempdir().unwrap();
    let o = gclab(&["convexity", "--kappa", "1", "--gamma", "0.05", "--assert"], Some(dir.path()), None);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS min second difference of log H"));
}

#[test]
fn assert_positive_below_threshold_fails_and_still_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = gclab(&["threshold", "--gamma", "0.4", "--assert-positive"], Some(dir.path()), None);
    assert_eq!(code(&o), 2);
    let rec = json(&dir.path().join("threshold/record.json"));
    assert_eq!(rec["status"], "fail");
    assert!(rec["checks"].as_array().unwrap().iter().any(|c| c["name"] == "sup E(0.4) > 0" && c["pass"] == false));

    let o = gclab(&["threshold", "--gamma", "0.6", "--assert-positive"], Some(dir.path()), None);
    assert_eq!(code(&o), 0);
}

#[test]
fn failed_checks_exit_two_only_with_assert() {
    // e^{x²/16} outgrows |u(1)|² ~ e^{−2x²/17} for κ = 1
    let dir = tempfile::tempdir().unwrap();
    let o = gclab(&["interpolate", "--kappa", "1"], Some(dir.path()), None);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&dir.path().join("interpolate/record.json"))["status"], "fail");
    let o = gclab(&["interpolate", "--kappa", "1", "--assert"], Some(dir.path()), None);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gclab(&["evolve", "--no-such-flag"], Some(dir.path()), None)), 1);
    assert_eq!(code(&gclab(&["no-such-experiment"], Some(dir.path()), None)), 1);
    assert_eq!(code(&gclab(&["convexity", "--dt", "0.5"], Some(dir.path()), None)), 1);
    assert_eq!(code(&gclab(&["evolve", "--assert-positive"], Some(dir.path()), None)), 1);
    assert_eq!(code(&gclab(&["evolve", "--profile", "quick"], Some(dir.path()), None)), 1);
    assert_eq!(code(&gclab(&["--help"], None, None)), 0);
    assert_eq!(code(&gclab(&["--version"], None, None)), 0);
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "[grid]\nn_points = 1024\nbogus = 1\n"),
        ("mismatch.toml", "experiment = \"airy\"\n"),
        ("syntax.toml", "[grid\n"),
        ("grid.toml", "[grid]\nn_points = 1000\n"),
    ];
    for (name, text) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        let o = gclab(&["evolve", "--config", p.to_str().unwrap()], Some(dir.path()), None);
        assert_eq!(code(&o), 1, "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("configuration error"), "{name}");
    }
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&gclab(&["evolve", "--config", missing.to_str().unwrap()], Some(dir.path()), None)), 1);
}

#[test]
fn config_file_merges_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.toml");
    std::fs::write(&p, "experiment = \"ode-a\"\n[physics]\nr = 8.0\n[scan]\nradii = [2.0, 4.0, 8.0]\n").unwrap();
    let o = gclab(&["ode-a", "--config", p.to_str().unwrap(), "--radii", "2,8", "--assert"], Some(dir.path()), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec = json(&dir.path().join("ode-a/record.json"));
    assert_eq!(rec["config"]["physics"]["r"], 8.0);
    assert_eq!(rec["config"]["scan"]["radii"], serde_json::json!([2.0, 8.0]));
    assert_eq!(rec["config"]["grid"]["n_points"], 1024);
}

#[test]
fn output_root_precedence() {
    let flag = tempfile::tempdir().unwrap();
    let env = tempfile::tempdir().unwrap();
    let o = gclab(&["airy"], Some(flag.path()), Some(env.path()));
    assert_eq!(code(&o), 0);
    assert!(flag.path().join("airy/record.json").exists());
    assert!(!env.path().join("airy").exists());

    let p = flag.path().join("cfg.toml");
    let from_cfg = flag.path().join("from-config");
    std::fs::write(&p, format!("out = {:?}\n", from_cfg.to_str().unwrap())).unwrap();
    let o = gclab(&["airy", "--config", p.to_str().unwrap()], None, Some(env.path()));
    assert_eq!(code(&o), 0);
    assert!(env.path().join("airy/record.json").exists());
    assert!(!from_cfg.exists());

    let o = gclab(&["airy", "--config", p.to_str().unwrap()], None, None);
    assert_eq!(code(&o), 0);
    assert!(from_cfg.join("airy/record.json").exists());
}

#[test]
fn suite_with_invalid_override_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = gclab(&["suite", "--profile", "quick", "--dt", "0.5"], Some(dir.path()), None);
    assert_eq!(code(&o), 2);
    let s = json(&dir.path().join("suite/summary.json"));
    assert_eq!(s["pass"], false);
    assert!(dir.path().join("suite/summary.md").exists());
    assert!(dir.path().join("suite/summary.csv").exists());
    assert_eq!(code(&gclab(&["suite", "--config", "x.toml"], Some(dir.path()), None)), 1);
}

#[test]
fn quick_suite_passes_and_stops_at_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = gclab(&["suite", "--profile", "quick"], Some(dir.path()), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let s = json(&dir.path().join("suite/summary.json"));
    assert_eq!(s["profile"], "quick");
    assert!(s["entries"].as_array().unwrap().iter().all(|e| e["status"] == "pass"));

    let o = gclab(&["suite", "--profile", "quick", "--first-failure", "--dt", "0.5"], Some(dir.path()), None);
    assert_eq!(code(&o), 2);
    let s = json(&dir.path().join("suite/summary.json"));
    assert!(!s["skipped"].as_array().unwrap().is_empty());
}
