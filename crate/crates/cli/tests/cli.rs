use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn slackcrn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slackcrn")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn run(config: &str, out: &Path, extra: &[&str]) -> Output {
    let config = root().join("configs").join(config);
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    slackcrn(&args)
}

fn model(name: &str) -> String {
    root().join("models").join(name).to_string_lossy().into_owned()
}

#[test]
fn parse_prints_matrices() {
    let v = json(&slackcrn(&["parse", &model("example1.crn")]));
    assert_eq!(v["species"], serde_json::json!(["A", "B"]));
    assert_eq!(v["matrices"]["S"], serde_json::json!([[-1, 1, 0, 0, -1], [1, -1, -1, 1, 0], [0, 0, 1, -1, 1]]));
    assert_eq!(v["matrices"]["C"], serde_json::json!([[0, 1, 0], [0, 0, 1]]));
}

#[test]
fn slack_builds_the_requested_network() {
    let v = json(&slackcrn(&["slack", &model("example1.crn"), "--w", "2,1", "--u", "2", "--N", "40"]));
    assert_eq!(v["D"], serde_json::json!([[2, 0, 1]]));
    assert_eq!(v["network"][0], "2Y -> A @ 1");
}

#[test]
fn check_reports_structure() {
    let v = json(&slackcrn(&["check", &model("example1.crn")]));
    assert_eq!(v["weakly_reversible"], true);
    assert_eq!(v["deficiency"], 0);

    let v = json(&slackcrn(&["check", &model("poisson.crn")]));
    assert_eq!(v["complex_balanced"], true);
    let c = v["complex_balance"]["c_star"][0].as_f64().unwrap();
    assert!((c - 2.0).abs() < 1e-9);

    let v = json(&slackcrn(&["check", &model("lotka_volterra.crn"), "--w", "1,1"]));
    assert_eq!(v["lyapunov"]["status"], "certified");
}

#[test]
fn stationary_task_writes_truncated_poisson() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("poisson_stationary.json", dir.path(), &["--N", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("stationary_slack-regular_N2.csv")).unwrap();
    let p: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    for (got, want) in p.iter().zip([0.2, 0.4, 0.4]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn compare_flags_the_buffer_trap() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("example1_compare.json", dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    let results = summary["results"].as_array().unwrap();
    let buffer = results.iter().find(|r| r["method"] == "buffer").unwrap();
    assert_eq!(buffer["flag"], "absorbing state (0,40)");
    assert_eq!(buffer["status"], "finding");
    let slack = results.iter().find(|r| r["method"] == "slack-regular").unwrap();
    assert_eq!(slack["status"], "ok");
    assert!(slack.get("flag").is_none());
}

#[test]
fn mfpt_sweep_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--N", "10,20,40,80", "--seed", "5"];
    for dir in [&a, &b] {
        let out = run("lotka_volterra_mfpt.json", dir.path(), &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let sweep = std::fs::read_to_string(a.path().join("mfpt_slack-optimized_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    assert!(sweep.starts_with("N,mean,residual"));
    for name in ["mfpt_slack-optimized_sweep.csv", "mfpt_slack-optimized_N40.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }

    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    assert!(summary["results"].as_array().unwrap().iter().all(|r| r["residual"].as_f64().unwrap() < 1e-10));
    assert_eq!(summary["config"]["ssa"]["seed"], 5);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["files"].as_array().unwrap().iter().any(|f| f == "summary.json"));
}

#[test]
fn rejects_a_decreasing_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("poisson_stationary.json", dir.path(), &["--N", "5,2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly increasing"));
}
