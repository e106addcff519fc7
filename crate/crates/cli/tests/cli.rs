use std::path::Path;
use std::process::{Command, Output};

fn adagrid(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adagrid"))
        .args(args)
        .arg("--data-dir")
        .arg(dir.join("sessions"))
        .arg("--log-level")
        .arg("error")
        .current_dir(dir)
        .output()
        .expect("run adagrid")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn design_writes_csv_and_rejects_bad_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = adagrid(dir.path(), &["design", "--kind", "sg", "-p", "2", "-n", "9", "--out", "sg.csv"]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(dir.path().join("sg.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x1,x2"));
    assert_eq!(text.lines().count(), 10);

    let o = adagrid(dir.path(), &["design", "--kind", "sg", "-p", "2", "-n", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n=9 or n=16"));
}

#[test]
fn run_emits_a_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = adagrid(
        dir.path(),
        &["run", "--strategy", "ag", "--oracle", "illustration", "-n", "16", "--seed", "0", "--out", "t.ndjson"],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("0.1875"), "{}", stdout(&o));
    let trace = std::fs::read_to_string(dir.path().join("t.ndjson")).unwrap();
    assert_eq!(trace.lines().count(), 16);

    let o = adagrid(dir.path(), &["run", "--strategy", "nope", "--oracle", "illustration"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn theory_checks_report_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = adagrid(dir.path(), &["theory", "--check", "illustration-ag", "--check", "table-constants"]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 2);
}

#[test]
fn bench_writes_results_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let plan = serde_json::json!({
        "name": "tiny",
        "oracle": { "family": "arctan", "p": 2, "draws": 2 },
        "strategies": [{ "kind": "ag" }, { "kind": "mc" }],
        "budgets": [4, 8],
        "test_points": 500,
        "master_seed": 1,
        "classifier": false
    });
    std::fs::write(dir.path().join("plan.json"), plan.to_string()).unwrap();
    let o = adagrid(dir.path(), &["bench", "plan.json", "--out", "r.csv"]);
    assert!(o.status.success(), "{o:?}");
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("strategy,p,oracle_id,n,v_uncertain,accuracy,gamma,wall_time_ms"));
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["master_seed"], 1);
}

#[test]
fn session_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let o = adagrid(dir.path(), &["session", "create", "--strategy", "gi", "-p", "1", "--budget", "3"]);
    assert!(o.status.success(), "{o:?}");
    let id = stdout(&o).trim().to_string();
    for _ in 0..3 {
        let s: serde_json::Value =
            serde_json::from_slice(&adagrid(dir.path(), &["session", "suggest", &id]).stdout).unwrap();
        let x = s["unit"][0].as_f64().unwrap();
        let label = if x >= 0.3 { "1" } else { "-1" };
        let o = adagrid(dir.path(), &["session", "outcome", &id, "--label", label]);
        assert!(o.status.success(), "{o:?}");
    }
    let s: serde_json::Value =
        serde_json::from_slice(&adagrid(dir.path(), &["session", "suggest", &id]).stdout).unwrap();
    assert_eq!(s["kind"], "complete");
    let o = adagrid(dir.path(), &["session", "report", &id, "--out", "report.json"]);
    assert!(o.status.success(), "{o:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["evaluated"].as_array().unwrap().len(), 3);
    assert_eq!(report["volume"]["v_uncertain"], 0.125);

    let o = adagrid(dir.path(), &["session", "show", "missing"]);
    assert_eq!(o.status.code(), Some(1));
}
