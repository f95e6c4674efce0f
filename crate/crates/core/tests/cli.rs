use std::process::Command;

fn gerbecalc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gerbecalc"))
}

#[test]
fn deligne_suite_passes_and_reports_json() {
    let out = gerbecalc().args(["--command", "deligne", "--samples", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["command"], "deligne");
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 5);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = std::env::temp_dir().join(format!("gerbecalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    let report = dir.join("report.json");
    std::fs::write(&cfg, r#"{"command": "form-identities", "samples": 3, "seed": 1}"#).unwrap();
    let out = gerbecalc()
        .args(["--config", cfg.to_str().unwrap(), "--seed", "5", "--report", report.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["config"]["seed"], 5);
    assert_eq!(r["config"]["samples"], 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_command_exits_with_usage_code() {
    let out = gerbecalc().args(["--command", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_exit_with_file_code() {
    let out = gerbecalc().args(["--config", "/nonexistent/run.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = gerbecalc().args(["--command", "deligne", "--model", "/nonexistent/model.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
