use std::fs;
use std::process::Command;

fn dynmis() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dynmis"))
}

#[test]
fn run_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("tri.jsonl");
    fs::write(
        &scenario,
        "{\"op\":\"initial\",\"nodes\":[0,1,2],\"edges\":[[0,1]]}\n\
         {\"op\":\"edge_insert\",\"u\":1,\"v\":2}\n\
         {\"op\":\"node_insert\",\"v\":3,\"nbrs\":[0,2]}\n\
         {\"op\":\"node_delete_abrupt\",\"v\":1}\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = dynmis()
        .args(["run", scenario.to_str().unwrap(), "--trials", "4", "--seed", "7", "--debug-rounds", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    let mut lines = records.lines();
    assert_eq!(lines.next(), Some("scenario,trial,change_idx,change_type,adjustments,rounds,broadcasts,S_size"));
    assert_eq!(lines.count(), 12);
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().starts_with("scenario,metric,"));
    assert!(fs::read_to_string(out.join("rounds.jsonl")).unwrap().lines().count() > 0);
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"op\":\"edge_insert\",\"u\":0}\n").unwrap();
    let out = dynmis().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let invalid = dir.path().join("invalid.jsonl");
    fs::write(&invalid, "{\"op\":\"edge_insert\",\"u\":0,\"v\":1}\n").unwrap();
    let out = dynmis().args(["run", invalid.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 1"));
}

#[test]
fn async_schedule_runs_the_template() {
    let out = dynmis()
        .args(["sweep", "--generator", "gnp-churn", "--n", "10,20", "--steps", "20", "--protocol", "template"])
        .args(["--mode", "async", "--trials", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 20);

    let out = dynmis().args(["sweep", "--generator", "star", "--mode", "async"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_then_run_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("star.jsonl");
    let status = dynmis().args(["generate", "--generator", "star", "--n", "6", "--out"]).arg(&file).status().unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(&file).unwrap().lines().count(), 6);
    let out = dynmis().args(["run", file.to_str().unwrap(), "--trials", "3"]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn demo_prints_a_report() {
    let out = dynmis().args(["demo", "star", "--trials", "50"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n"], 100);
    assert!(report["final_mis"]["mean"].as_f64().unwrap() > 90.0);
}
