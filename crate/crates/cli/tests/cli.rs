use std::path::Path;
use std::process::{Command, Output};

use commsq::catalog::{fourier_matrix, hadamard_square, hadamard_square_unchecked, rotation_matrix};
use commsq::connection::BiUnitaryConnection;
use commsq::square::CommutingSquare;

fn commsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commsq")).arg("--quiet").args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_fourier_square_passes() {
    let dir = tempfile::tempdir().unwrap();
    let sq = hadamard_square(&fourier_matrix(2)).unwrap();
    let f = write_json(dir.path(), "fourier.json", &sq.to_json());
    let o = commsq(&["verify", &f]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("commuting square"));
}

#[test]
fn verify_rotated_square_fails_and_names_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let sq = hadamard_square_unchecked(&rotation_matrix(std::f64::consts::PI / 6.0)).unwrap();
    let f = write_json(dir.path(), "rot.json", &sq.to_json());
    let o = commsq(&["verify", &f]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    let o = commsq(&["verify", &f, "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["passes"], false);
    assert_eq!(v["conditions"].as_array().unwrap().len(), 6);
}

#[test]
fn malformed_input_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"schema\": ").unwrap();
    assert_eq!(code(&commsq(&["verify", p.to_str().unwrap()])), 2);
    assert_eq!(code(&commsq(&["principal-graph", p.to_str().unwrap()])), 2);
    assert_eq!(code(&commsq(&["principal-graph", "no-such-entry"])), 2);
    assert_eq!(code(&commsq(&["verify", "missing.json"])), 2);
    assert_eq!(code(&commsq(&["flat", "a3", "--tol", "-1"])), 2);
}

#[test]
fn principal_graph_of_catalog_entries() {
    let o = commsq(&["principal-graph", "a3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "commsq/flatness/v1");
    assert_eq!(v["dynkin"], "A3");
    assert!((v["index"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(v["l_star"].is_array());

    let o = commsq(&["principal-graph", "e7", "--direction", "horizontal", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["dynkin"], "D10");
}

#[test]
fn small_caps_are_undecided() {
    let o = commsq(&["principal-graph", "a5", "--kmax", "2", "--format", "json"]);
    assert_eq!(code(&o), 3);
    let v = stdout_json(&o);
    assert_eq!(v["kind"], "undecided");
    assert_eq!(v["dims"][0], serde_json::json!([1, 1, 2]));
    assert_eq!(code(&commsq(&["flat", "e7", "--kmax", "3"])), 3);
}

#[test]
fn flatness_reports() {
    let o = commsq(&["flat", "trivial", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["flat"], true);
    let o = commsq(&["flat", "a3"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("a3: flat"));
    let o = commsq(&["flat", "e7", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["flat"], false);
    let w = &v["witness"];
    assert!(w["norm"].as_f64().unwrap() > 0.1);
    assert!(w["defects"].as_array().unwrap().iter().any(|d| d.as_f64().unwrap() > 1e-6));
    assert!(!w["blocks"].as_array().unwrap().is_empty());
}

#[test]
fn exported_connection_round_trips_and_gives_the_same_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e6.json");
    let o = commsq(&["catalog", "export", "e6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let conn = BiUnitaryConnection::from_json(&v).unwrap();
    assert_eq!(conn.to_json(), v);
    let o = commsq(&["principal-graph", out.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["dynkin"], "E6");
}

#[test]
fn exported_square_round_trips() {
    let o = commsq(&["catalog", "export", "hadamard-3", "--square"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let sq = CommutingSquare::from_json(&v).unwrap();
    assert_eq!(sq.to_json(), v);
    assert_eq!(code(&commsq(&["catalog", "export", "a3", "--square"])), 2);
}

#[test]
fn dot_output() {
    let o = commsq(&["principal-graph", "a4", "--format", "dot"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.starts_with("graph"));
    assert_eq!(s.matches(" -- ").count(), 3);
}

#[test]
fn catalog_listing_and_data_dir_override() {
    let o = commsq(&["catalog", "list", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "commsq/catalog/v1");
    assert!(v["entries"].as_array().unwrap().iter().any(|e| e["name"] == "e7"));

    let o = commsq(&["catalog", "show", "E7"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("D10"));

    let dir = tempfile::tempdir().unwrap();
    let custom = serde_json::json!({
        "schema": "commsq/catalog/v1",
        "entries": [{
            "name": "only",
            "description": "single edge",
            "source": {"kind": "self-system", "graph": "A2"},
            "expected": {}
        }]
    });
    write_json(dir.path(), "catalog.json", &custom);
    let o = Command::new(env!("CARGO_BIN_EXE_commsq"))
        .args(["--quiet", "catalog", "list"])
        .env("COMMSQ_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
}

#[test]
fn progress_goes_to_stderr() {
    let o = Command::new(env!("CARGO_BIN_EXE_commsq")).args(["principal-graph", "a4", "--format", "json"]).output().unwrap();
    assert_eq!(code(&o), 0);
    stdout_json(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k="));
}
