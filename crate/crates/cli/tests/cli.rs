use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specflow"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(out: &Path, args: &[&str]) -> Output {
    let o = run(out, args);
    assert!(
        o.status.success(),
        "{args:?}: {}\n{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn portrait_reports_critical_points() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["portrait", fixture("ray.json").to_str().unwrap()]);
    let doc = json(dir.path().join("portrait.json"));
    let mut crit: Vec<(f64, f64, f64)> = doc["critical"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["z"][0].as_f64().unwrap(), c["z"][1].as_f64().unwrap(), c["t"].as_f64().unwrap()))
        .collect();
    crit.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    assert_eq!(crit.len(), 2);
    assert!(crit[0].0.abs() < 1e-9 && (crit[0].2 - 1.0).abs() < 1e-9);
    assert!((crit[1].0 + 2.0).abs() < 1e-9 && (crit[1].2 - 3.0).abs() < 1e-9);
    assert_eq!(doc["definability"]["real_ray"]["verdict"], "obstructed");
}

#[test]
fn complex_example_has_degree_four() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["portrait", fixture("figure1.json").to_str().unwrap()]);
    assert_eq!(json(dir.path().join("portrait.json"))["l"], 4);
}

#[test]
fn singular_circle_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["circle", fixture("ray.json").to_str().unwrap(), "--t", "1"]);
    let doc = json(dir.path().join("sweep.json"));
    assert_eq!(doc["singular"], true);
    let z = &doc["events"][0]["z"];
    assert!(z[0].as_f64().unwrap().abs() < 1e-9 && z[1].as_f64().unwrap().abs() < 1e-9);
    assert!(dir.path().join("circle.svg").exists());
}

#[test]
fn jordan_circle_is_a_four_cycle() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["circle", fixture("jordan4.json").to_str().unwrap(), "--t", "2"]);
    assert_eq!(json(dir.path().join("sweep.json"))["cycle_lengths"], serde_json::json!([4]));
}

#[test]
fn trace_writes_the_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &["trace", fixture("ones.json").to_str().unwrap(), "--tmin", "1", "--tmax", "100", "--steps", "50"],
    );
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("parameter,branch_id,re,im,event_flag"));
    assert_eq!(lines.count(), 51 * 2);
    assert!(std::fs::read_to_string(dir.path().join("trace.svg")).unwrap().contains("<polyline"));
}

#[test]
fn levelset_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_ok(
        dir.path(),
        &["levelset", fixture("ray.json").to_str().unwrap(), "--t", "3", "--window", "-4,2,-3,3", "--res", "120"],
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("1 singular points"));
    let text = std::fs::read_to_string(dir.path().join("levelset.csv")).unwrap();
    assert!(text.lines().skip(1).any(|l| l.ends_with(",1")));
    let bad = run(dir.path(), &["levelset", fixture("ray.json").to_str().unwrap(), "--t", "3", "--window", "0,1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn nonneg_example_counts_two() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["check-nonneg", fixture("ones.json").to_str().unwrap(), "--edge", "1,2"]);
    let doc = json(dir.path().join("nonneg.json"));
    assert_eq!(doc["l"], 2);
    assert_eq!(doc["empirical_count"], 2);
    // too small a tau for the count to have settled
    let o = run(dir.path(), &["check-nonneg", fixture("ones.json").to_str().unwrap(), "--edge", "1,2", "--tau", "1e-3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["check-nonneg", fixture("ones.json").to_str().unwrap(), "--edge", "0,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn asymptotics_report() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        dir.path(),
        &["asymptotics", fixture("ones.json").to_str().unwrap(), "--tau-grid", "100,10000,1000000"],
    );
    let doc = json(dir.path().join("asym.json"));
    assert_eq!(doc["model"]["kappa"], 1);
    let slope = doc["report"]["unbounded"]["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.05);
}

#[test]
fn structured_check() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["check-structured", fixture("hamiltonian.json").to_str().unwrap()]);
    let doc = json(dir.path().join("structured.json"));
    assert_eq!(doc["forecast"]["count"], 4);
    assert_eq!(doc["pass"], true);
    let o = run(dir.path(), &["check-structured", fixture("ray.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["ray.json", "angular.json", "frozen.json", "ones.json", "hamiltonian.json", "figure1.json", "jordan4.json"] {
        let o = Command::new(env!("CARGO_BIN_EXE_specflow"))
            .env("SPECFLOW_THREADS", "2")
            .arg("--out")
            .arg(dir.path())
            .args(["verify", fixture(name).to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(json(dir.path().join("verify.json"))["pass"], true);
    }
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let zero_u = write(d, "zero.json", r#"{"A": [[1, 0], [0, 2]], "u": [0, 0], "v": [1, 1]}"#);
    let with_v = write(
        d,
        "with_v.json",
        r#"{"A": [[0, 1], [0, 0]], "u": [0, 1], "v": [1, 0], "structure": {"kind": "J", "G": [[0, 1], [-1, 0]]}}"#,
    );
    let malformed = write(d, "bad.json", "{\"A\": [[1]");
    for file in [&zero_u, &with_v, &malformed, &"missing.json".to_string()] {
        assert_eq!(run(d, &["portrait", file]).status.code(), Some(1), "{file}");
    }
    let ray = fixture("ray.json");
    assert_eq!(run(d, &["portrait", ray.to_str().unwrap(), "--bogus"]).status.code(), Some(1));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn structured_input_derives_v() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "j.json",
        r#"{"A": [[0, 1], [0, 0]], "u": [0, 1], "structure": {"kind": "J", "G": [[0, 1], [-1, 0]]}}"#,
    );
    run_ok(dir.path(), &["portrait", &f]);
    // v = -J u = (-1, 0), so v* A^k u vanishes for k = 0 only
    let doc = json(dir.path().join("portrait.json"));
    assert_eq!(doc["l"], 2);
}
