use std::path::Path;
use std::process::{Command, Output};

fn thornsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thornsim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("THORNSIM_THREADS")
        .output()
        .unwrap()
}

#[test]
fn dech_ratio_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = thornsim(&["dech-ratio", "--case", "electron"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("ratio = 1.97"));
}

#[test]
fn unknown_config_key_fails_with_a_named_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"run": {"n_trajectory": 5}}"#).unwrap();
    let out = thornsim(&["simulate", "--config", "bad.json"], dir.path());
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert!(err["message"].as_str().unwrap().contains("n_trajectory"), "{err}");
    assert!(err["error"].is_string());
}

#[test]
fn invalid_values_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = thornsim(&["simulate", "--n", "0"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_trajectories"));
    let out = thornsim(&["dech-ratio", "--case", "proton"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"xsection": {"thorn": "atom", "per_decade": 8}}"#).unwrap();
    let out = thornsim(&["xsection", "--config", "c.json", "--out", "a"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = thornsim(&["xsection", "--config", "a/config.json", "--out", "b"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(dir.path().join("a/xsection.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/xsection.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with(b"# thornsim "));
}
