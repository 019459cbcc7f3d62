use std::path::Path;
use std::process::{Command, Output};

fn wpvol(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpvol"))
        .args(args)
        .env("WPVOL_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn cache_in(dir: &tempfile::TempDir) -> std::path::PathBuf {
    dir.path().join("cache.json")
}

#[test]
fn compute_base_case_text() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["compute", "--g", "1", "--n", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "(L1^2 + 4*pi^2)/48");
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"engine_version\""));
}

#[test]
fn compute_latex() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["compute", "--g", "0", "--n", "4", "--format", "latex"]);
    assert_eq!(
        stdout(&o).trim(),
        "\\tfrac{1}{2}(L_1^2+L_2^2+L_3^2+L_4^2) + 2\\pi^2"
    );
}

#[test]
fn compute_super_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["compute", "--g", "1", "--n", "2", "--super", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["text"], "-1/8");
    assert_eq!(v["key"], "Vsu[1,2]");
    assert!(v["manifest"]["cache_state"].as_str().unwrap().len() == 64);
}

#[test]
fn unstable_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["compute", "--g", "0", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unstable: 2g-2+n must be positive"));
    let o = wpvol(&cache_in(&dir), &["check", "--max-dim", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identity_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["check", "--suite", "identities", "--max-dim", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("summary:") && out.contains(" 0 fail"));
    assert!(out.contains("DVV constraint"));
}

#[test]
fn laplace_suite_reports_truncation_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["check", "--suite", "laplace", "--max-dim", "4", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        match c["status"].as_str().unwrap() {
            "pass" => assert!(c["order"].as_i64().unwrap() >= 2, "{c}"),
            "skipped" => {}
            other => panic!("unexpected status {other}: {c}"),
        }
    }
}

#[test]
fn numeric_suite_reports_samples() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["check", "--suite", "numeric", "--max-dim", "4", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let passed: Vec<_> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "pass")
        .collect();
    assert_eq!(passed.len(), 12);
    for c in passed {
        let samples = c["numeric"]["samples"].as_array().unwrap();
        assert_eq!(samples.len(), 3);
        for s in samples {
            assert!(s["rel_err"].as_f64().unwrap() < 1e-8);
            assert_eq!(s["pass"], true);
        }
    }
}

#[test]
fn tables() {
    let dir = tempfile::tempdir().unwrap();
    let c = cache_in(&dir);
    let o = wpvol(&c, &["table", "--kind", "intersections", "--max-dim", "2"]);
    let out = stdout(&o);
    for line in ["<tau_0^3>_0 = 1", "<tau_1>_1 = 1/24", "<tau_0^3 tau_1>_0 = 1"] {
        assert!(out.lines().any(|l| l == line), "missing {line}");
    }
    let o = wpvol(&c, &["table", "--kind", "volumes", "--max-dim", "1"]);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "V[1,1] = (L1^2 + 4*pi^2)/48"));
    assert!(out.lines().any(|l| l == "V[0,3] = 1"));
    let o = wpvol(&c, &["table", "--kind", "volumes", "--min-dim", "3", "--max-dim", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 0);
    assert_eq!(v["manifest"]["results"]["entries"], 0);
    let o = wpvol(&c, &["table", "--kind", "laplace", "--max-dim", "1"]);
    assert!(stdout(&o).contains("F[1,1] = 1/24*t1^-3 + 1/12*pi^2*t1^-1"));
}

#[test]
fn laplace_command_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = wpvol(&cache_in(&dir), &["laplace", "--g", "1", "--n", "1", "--super", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["transform"]["-1"], serde_json::json!([[0, "1/8"]]));
    let o = wpvol(&cache_in(&dir), &["laplace", "--g", "0", "--n", "3", "--w"]);
    assert_eq!(stdout(&o).trim(), "1*t1^-2*t2^-2*t3^-2");
}

#[test]
fn deterministic_and_cache_independent() {
    let dir = tempfile::tempdir().unwrap();
    let c = cache_in(&dir);
    let args = ["check", "--suite", "identities", "--max-dim", "3", "--format", "json"];
    let cold = wpvol(&c, &args);
    assert!(c.exists());
    let warm = wpvol(&c, &args);
    let again = wpvol(&c, &args);
    assert_eq!(warm.stdout, again.stdout);
    let strip = |o: &Output| {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["checks"].clone()
    };
    assert_eq!(strip(&cold), strip(&warm));
}

#[test]
fn corrupt_cache_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let c = cache_in(&dir);
    std::fs::write(&c, "{not json").unwrap();
    let o = wpvol(&c, &["compute", "--g", "1", "--n", "1"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let text = std::fs::read_to_string(&c).unwrap();
    assert!(text.contains("\"1,1,false\""));
}

#[test]
fn stale_version_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let c = cache_in(&dir);
    std::fs::write(&c, r#"{"version":"0.0.0-old","entries":{"1,1,false":[{"exp":[0],"coef":[[0,"5/1"]]}]}}"#).unwrap();
    let o = wpvol(&c, &["compute", "--g", "1", "--n", "1"]);
    assert_eq!(stdout(&o).trim(), "(L1^2 + 4*pi^2)/48");
}

#[test]
fn cache_path_flag_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let env_path = dir.path().join("env.json");
    let flag_path = dir.path().join("flag.json");
    let o = wpvol(
        &env_path,
        &["--cache-path", flag_path.to_str().unwrap(), "compute", "--g", "0", "--n", "4"],
    );
    assert!(o.status.success());
    assert!(flag_path.exists());
    assert!(!env_path.exists());
}
