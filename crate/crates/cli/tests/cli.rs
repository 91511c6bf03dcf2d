use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bondgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bondgraph")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn example(dir: &Path, name: &str) -> String {
    let o = bondgraph(&["example", name]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, stdout(&o)).unwrap();
    path.to_str().unwrap().to_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn every_example_validates_reduces_and_simulates() {
    let dir = tempfile::tempdir().unwrap();
    for (name, x0, controls) in [
        ("rlc", "0,0", vec!["sin(t)"]),
        ("decay", "1", vec![]),
        ("hamiltonian", "1,0", vec![]),
        ("oscillator", "1,0", vec!["0"]),
        ("cavity", "0,0,0,0,0,0,0,0,0,0,0,0,0", vec!["1"]),
        ("lc", "1,0", vec![]),
    ] {
        let path = example(dir.path(), name);
        assert_eq!(bondgraph(&["validate", &path]).status.code(), Some(0), "{name}");
        let a = bondgraph(&["relations", &path]);
        let b = bondgraph(&["relations", &path]);
        assert_eq!(stdout(&a), stdout(&b));
        let mut args = vec!["simulate", &path, "--x0", x0, "--t1", "0.5", "--dt", "0.05"];
        for c in &controls {
            args.extend(["--control", c]);
        }
        let o = bondgraph(&args);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("steps 10, newton iterations"));
    }
}

#[test]
fn cavity_relations() {
    let dir = tempfile::tempdir().unwrap();
    let path = example(dir.path(), "cavity");
    let out = stdout(&bondgraph(&["relations", &path]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 14);
    assert!(lines[0].starts_with("dx_0 + "));
    assert_eq!(lines[13], "f_0 - 6*x_2 - x_0*x_2");
}

#[test]
fn cavity_example_has_five_oscillators() {
    let text = stdout(&bondgraph(&["example", "cavity"]));
    for f in ["\"10/17\"", "\"10/19\"", "\"1/2\"", "\"10/21\"", "\"10/23\""] {
        assert!(text.contains(f), "{f}");
    }
    let osc = stdout(&bondgraph(&["example", "oscillator"]));
    assert!(osc.contains("\"1/10\""));
}

#[test]
fn single_resistor_exposed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "r.json",
        r#"{"name": "r", "components": [{"id": "R", "kind": "R", "value": 1}, {"id": "port", "kind": "SS"}],
            "bonds": [["port", "R"]], "exposures": [{"component": "port"}]}"#,
    );
    assert_eq!(stdout(&bondgraph(&["relations", &path])), "e_0 - f_0\n");
}

#[test]
fn empty_model_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "e.json", r#"{"name": "empty"}"#);
    let o = bondgraph(&["relations", &path]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn decay_csv_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = example(dir.path(), "decay");
    let csv = dir.path().join("out.csv");
    let o = bondgraph(&["simulate", &path, "--x0", "1", "--t0", "0", "--t1", "1", "--dt", "1e-3", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,x_0"));
    let last: f64 = text.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - 0.367879).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let decay = example(dir.path(), "decay");
    assert_eq!(bondgraph(&["simulate", &decay, "--t1", "1", "--dt", "0.1"]).status.code(), Some(1));
    assert_eq!(bondgraph(&["simulate", &decay, "--x0", "1", "--t1", "1", "--dt", "-1"]).status.code(), Some(1));
    assert_eq!(bondgraph(&["bogus"]).status.code(), Some(1));
    let o = bondgraph(&["example", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cavity"));

    let empty = write(dir.path(), "empty.json", "{}");
    let o = bondgraph(&["validate", &empty]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/name"));

    let ghost = write(
        dir.path(),
        "ghost.json",
        r#"{"name": "m", "components": [{"id": "C", "kind": "C"}], "bonds": [["C", "ghost"]]}"#,
    );
    let o = bondgraph(&["validate", &ghost]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ghost"));

    let loose = write(dir.path(), "loose.json", r#"{"name": "m", "components": [{"id": "C", "kind": "C", "value": 1}]}"#);
    let o = bondgraph(&["validate", &loose]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unbonded"));

    let log = write(
        dir.path(),
        "log.json",
        r#"{"name": "m", "components": [{"id": "p", "kind": "PH", "value": {"hamiltonian": "log(x_0)"}}, {"id": "R", "kind": "R", "value": 1}],
            "bonds": [["p", "R"]]}"#,
    );
    let o = bondgraph(&["simulate", &log, "--x0", "-1", "--t1", "1", "--dt", "0.1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn cavity_constant_drive_stays_finite() {
    let dir = tempfile::tempdir().unwrap();
    let path = example(dir.path(), "cavity");
    let csv = dir.path().join("cavity.csv");
    let o = bondgraph(&[
        "simulate", &path, "--x0", "0,0,0,0,0,0,0,0,0,0,0,0,0", "--t1", "100", "--dt", "0.01", "--control", "6", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 10_002);
    for line in text.lines().skip(1) {
        assert!(line.split(',').all(|v| v.parse::<f64>().unwrap().is_finite()));
    }
}
