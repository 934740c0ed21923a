use std::process::Command;

fn mec_sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mec-sim"))
}

#[test]
fn run_writes_all_three_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = mec_sim()
        .args(["run", "--algo", "nl", "--slots", "25", "--seed", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["policy"], "nl");
    assert_eq!(summary["slots"], 25);
    for f in ["trace.csv", "summary.json", "config.toml"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let cfg = semantic_mec::load_config(dir.path().join("config.toml")).unwrap();
    assert_eq!((cfg.seed, cfg.horizon), (3, 25));
}

#[test]
fn sweep_accepts_a_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, "param = \"p_exp\"\nvalues = [0.5, 2.0]\npolicies = [\"drmsa\"]\n").unwrap();
    let out = mec_sim()
        .args(["sweep", "--slots", "10", "--sweep"])
        .arg(&spec)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn bad_input_exits_with_two() {
    let status = mec_sim().args(["run", "--config", "/definitely/not/here.toml"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    let status = mec_sim().args(["sweep", "--sweep", "no-such-preset", "--slots", "1"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_reports_every_suite() {
    let out = mec_sim().args(["verify", "--instances", "20", "--seed", "5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), 5);
}
