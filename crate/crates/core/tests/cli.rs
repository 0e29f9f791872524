use std::fs;
use std::process::{Command, Output};

fn eoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eoflow"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_replay_and_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("baseline.jsonl");
    let trace = dir.path().join("baseline.trace.json");
    let out = eoflow(&[
        "run",
        "--scenario",
        "baseline",
        "--log",
        log.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(reports[0]["steps"], 4);
    assert_eq!(reports[1]["arm"], "bt");

    let replay = eoflow(&["replay", log.to_str().unwrap()]);
    assert!(replay.status.success());
    assert!(stdout(&replay).contains(r#""outcome": "pass""#));

    let eo: serde_json::Value =
        serde_json::from_str(&stdout(&eoflow(&["metrics", log.to_str().unwrap()]))).unwrap();
    assert_eq!(eo["actions"].as_array().unwrap().len(), 4);
    let bt: serde_json::Value =
        serde_json::from_str(&stdout(&eoflow(&["metrics", trace.to_str().unwrap()]))).unwrap();
    assert_eq!(bt["arm"], "bt");
    assert_eq!(bt["steps"], reports[1]["steps"]);
}

#[test]
fn replay_of_tampered_log_fails() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let export = eoflow(&["export", "--format", "jsonl"]);
    assert!(export.status.success());
    let text = stdout(&export);
    assert_eq!(text, include_str!("golden/baseline.jsonl"));
    fs::write(&log, text.replacen("Loc C", "Loc A", 2)).unwrap();
    let out = eoflow(&["replay", log.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("diverged"));
}

#[test]
fn load_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("extra.bsl");
    fs::write(
        &good,
        "Location: Individual: Loc D\n: SetModel: Model Location\n",
    )
    .unwrap();
    let out = eoflow(&["load", "--corpus", "delivery", good.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains(r#"created ["Loc D"]"#));

    let bad = dir.path().join("bad.bsl");
    fs::write(&bad, "Robot: Individual: R\n: SetModel: Model Nowhere\n").unwrap();
    let out = eoflow(&["load", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn sweep_and_hotload_commands() {
    let sweep = eoflow(&["sweep", "--recharge", "--dock"]);
    assert!(sweep.status.success());
    assert_eq!(
        stdout(&sweep)
            .lines()
            .filter(|l| l.ends_with("agree"))
            .count(),
        27
    );
    let hot = eoflow(&["hotload"]);
    assert!(hot.status.success());
    assert!(!stdout(&hot).contains("FAIL"));
}
