use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab"))
        .arg("--fixtures")
        .arg(fixtures())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn matching_table_exits_zero() {
    let o = run(&["audit", "--table", "cur4", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // π₂-sensitive differences are warnings only
    assert!(stderr(&o).contains("warning (pi2-sensitive)"));
    assert!(stdout(&o).starts_with("# Table cur4 at n = 2"));
}

#[test]
fn deviating_table_exits_one() {
    let o = run(&["audit", "--table", "ric6", "--format", "json", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("diff: od2+2- / Ric:l11"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "table-audit");
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["audit", "--table", "ric9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["audit"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["dims", "--n", "7"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_curvlab"))
        .args(["--fixtures", dir.path().to_str().unwrap(), "audit", "--table", "ric4"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("jet.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = run(&["decompose", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, jobs) in [(&a, "1"), (&b, "4")] {
        let o = run(&["audit", "--table", "ric4", "--format", "json", "--no-timestamp", "--jobs", jobs, "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn timestamp_is_the_only_difference() {
    let plain = stdout(&run(&["identity", "--n", "4", "--format", "json", "--no-timestamp"]));
    let stamped = stdout(&run(&["identity", "--n", "4", "--format", "json"]));
    let mut v: serde_json::Value = serde_json::from_str(&stamped).unwrap();
    assert!(v["timestamp"].is_string());
    v.as_object_mut().unwrap().remove("timestamp");
    let p: serde_json::Value = serde_json::from_str(&plain).unwrap();
    assert_eq!(v, p);
}

#[test]
fn formats() {
    let csv = stdout(&run(&["audit", "--table", "cur4", "--format", "csv"]));
    assert!(csv.starts_with("# generated"));
    let md = stdout(&run(&["audit", "--table", "cur4", "--format", "md", "--no-timestamp"]));
    assert!(md.contains('|'));
}

#[test]
fn dims_at_n2_lists_absent_modules() {
    let o = run(&["dims", "--n", "2", "--format", "json", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let absent: Vec<&str> = v["data"]["atlas"]["absent"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(absent, vec!["K-2", "C4", "C7"]);
    assert_eq!(v["data"]["atlas"]["dim_r"], 20);
}

#[test]
fn identity_at_n5() {
    let o = run(&["identity", "--n", "5", "--format", "json", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["data"]["relation"]["validated"], true);
}

#[test]
fn gray_and_remarks() {
    assert_eq!(run(&["gray", "--no-timestamp"]).status.code(), Some(0));
    assert_eq!(run(&["remarks", "--n", "3", "--no-timestamp"]).status.code(), Some(0));
    let o = run(&["remarks", "--n", "2", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(d) nonzero: od24"));
}

#[test]
fn decompose_jet_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("zero.json");
    std::fs::write(&p, curvlab::torsion::TorsionJet::zero(2).unwrap().to_json().unwrap()).unwrap();
    let o = run(&["decompose", p.to_str().unwrap(), "--format", "json", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "decompose");
    assert!(v["data"]["classes"].as_array().unwrap().iter().all(|c| c["norm2"] == "0"));
    let o = run(&["decompose", "--n", "3", "--seed", "5", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn float_mode_is_flagged() {
    let o = run(&["audit", "--table", "cur4", "--mode", "float", "--no-timestamp"]);
    assert!(stderr(&o).contains("pre-filter"));
}
