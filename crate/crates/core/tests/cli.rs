use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn calibr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calibr")).args(args).env_remove("CALIBR_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn passing_and_failing_checks_set_the_exit_code() {
    let ok = calibr(&["modd", "--cal", "omega4", "--field", "builtin:z1sq", "--x", "1,0,0,0"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let r = report(&ok);
    assert_eq!(r["command"], "modd");
    assert_eq!(r["passed"], true);
    assert!(r["result"]["residual"].as_f64().unwrap() < 1e-12);

    let bad = calibr(&["psh", "--cal", "omega4", "--field", "builtin:negnormsq", "--probes", "random:3", "--count", "6"]);
    assert_eq!(code(&bad), 1);
    assert_eq!(report(&bad)["passed"], false);

    assert_eq!(code(&calibr(&["current-check", "--mesh", "disc:0.25", "--cal", "omega4"])), 0);
    assert_eq!(code(&calibr(&["current-check", "--mesh", "tilted:0.5,0.25", "--cal", "omega4"])), 1);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"n\": 4,\n  \"p\": 2,\n  \"terms\": [oops]\n}\n");
    let o = calibr(&["positivity", "--cal", "omega4", "--form", &bad]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&format!("{bad}:4:")), "{err}");

    assert_eq!(code(&calibr(&["comass", "--cal", "nonsense:1"])), 2);
    assert_eq!(code(&calibr(&["current-check", "--mesh", "missing.mesh", "--cal", "omega4"])), 2);
    assert_eq!(code(&calibr(&["modd", "--cal", "omega4", "--field", "builtin:z1sq"])), 2);
    assert_eq!(code(&calibr(&["psh", "--cal", "omega4", "--field", "builtin:nope"])), 2);
}

#[test]
fn reports_rerun_byte_identically_from_their_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = calibr(&["--seed", "11", "modd", "--cal", "kaehler:2,1", "--field", "builtin:rez1sq", "--x", "0.5,0.2,0,1"]);
    assert_eq!(code(&first), 0);
    let r = report(&first);
    assert_eq!(r["config"]["seed"], 11);
    let cfg = write(dir.path(), "run.json", &r["config"].to_string());
    let second = calibr(&["--config", &cfg]);
    assert_eq!(code(&second), 0);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn config_files_are_strict() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(
        dir.path(),
        "unknown.json",
        r#"{"command": {"modd": {"cal": "omega4", "field": "builtin:z1sq", "x": "1,0,0,0"}}, "colour": "red"}"#,
    );
    assert_eq!(code(&calibr(&["--config", &unknown])), 2);
    let nested = write(
        dir.path(),
        "nested.json",
        r#"{"command": {"modd": {"cal": "omega4", "field": "builtin:z1sq", "x": "1,0,0,0", "extra": 1}}}"#,
    );
    assert_eq!(code(&calibr(&["--config", &nested])), 2);
    let minimal = write(
        dir.path(),
        "minimal.json",
        r#"{"command": {"modd": {"cal": "omega4", "field": "builtin:z1sq", "x": "1,0,0,0"}}}"#,
    );
    let o = calibr(&["--config", &minimal]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["config"]["seed"], 7);
    assert_eq!(code(&calibr(&["--config", &minimal, "catalogue"])), 2);
}

#[test]
fn batch_duality_writes_one_csv_row_per_instance() {
    let o = calibr(&["duality", "--cal", "omega4", "--random", "12", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "instance,feasible,certificate,consistent,tie,residual,margin");
    assert_eq!(lines.len(), 13);
    for (i, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0], i.to_string());
    }

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("outcomes.csv");
    let o = calibr(&["duality", "--cal", "omega4", "--random", "5", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 6);
    let r = report(&o);
    assert_eq!(r["config"]["format"], "csv");
    assert_eq!(r["passed"], true);
}

#[test]
fn catalogue_dump_feeds_back_as_a_form() {
    let o = calibr(&["catalogue", "--dump", "special_lagrangian:3"]);
    assert_eq!(code(&o), 0);
    let spec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(spec["n"], 6);
    assert_eq!(spec["p"], 3);
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "sl3.json", &spec.to_string());
    let o = calibr(&["comass", "--form", &path]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = report(&o)["result"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn floats_are_printed_in_scientific_notation() {
    let o = calibr(&["modd", "--cal", "omega4", "--field", "builtin:z1sq", "--x", "1,0,0,0"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains(r#""tol":1.0000000000000000e-8"#), "{text}");
    assert!(text.ends_with('\n'));
}
