use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pi1-obstruct"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_shows_section_tags() {
    let out = run(&["list", "--format", "json"]);
    assert!(out.status.success());
    let rows: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rows.len() >= 9);
    let section = |id: &str| {
        rows.iter()
            .find(|r| r["id"] == id)
            .map(|r| r["section"].clone())
            .unwrap()
    };
    assert_eq!(section("t3"), "§4.2");
    assert_eq!(section("s5-conf-rho1"), "§3");
    for key in ["manifold", "kernel", "action"] {
        assert!(rows[0][key].is_string());
    }
}

#[test]
fn unknown_case_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = run(&[
        "certify",
        "--case",
        "t3,nope",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
    assert!(!out_path.exists(), "nothing may run before validation");
}

#[test]
fn t3_report_schema_and_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t3.json");
    let out = run(&[
        "certify",
        "--case",
        "t3",
        "--nodes",
        "32",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = read_json(&path);
    let r = &doc["reports"][0];
    assert_eq!(r["verdict"], "CERTIFIED");
    assert_eq!(r["paper_section"], "§4.2");
    for key in ["membership", "invariance", "obstruction", "config"] {
        assert!(r[key].is_object(), "{key}");
    }
    assert!(r["invariance"]["C"].is_number());
    assert_eq!(r["obstruction"]["nodes"], 32 * 32 * 32);
    assert_eq!(r["config"]["quadrature"]["nodes"], 32);
    assert!(r.get("wall_time_ms").is_none());
    assert_eq!(doc["config"]["nodes"], 32);
    assert_eq!(doc["config"]["cases"], serde_json::json!(["t3"]));
}

#[test]
fn config_file_sections_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "cases = [\"t2\", \"t3\"]\nnodes = 16\n\n[case.t3]\nnodes = 24\n",
    )
    .unwrap();
    let path = dir.path().join("r.json");
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--tol-invariance",
        "1e-5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = read_json(&path);
    assert_eq!(doc["reports"][0]["config"]["quadrature"]["nodes"], 16);
    assert_eq!(doc["reports"][1]["config"]["quadrature"]["nodes"], 24);
    assert_eq!(
        doc["reports"][1]["config"]["tolerances"]["invariance"],
        1e-5
    );
    // The embedded config reproduces the run when fed back as a file.
    let mut embedded = doc["config"].clone();
    embedded.as_object_mut().unwrap().remove("format");
    let toml_text = format!(
        "cases = {}\nnodes = {}\ntol_invariance = {:?}\n[case.t3]\nnodes = {}\n",
        embedded["cases"],
        embedded["nodes"],
        embedded["tol_invariance"].as_f64().unwrap(),
        embedded["case"]["t3"]["nodes"]
    );
    let cfg2 = dir.path().join("again.toml");
    std::fs::write(&cfg2, toml_text).unwrap();
    let path2 = dir.path().join("r2.json");
    let out = run(&[
        "certify",
        "--config",
        cfg2.to_str().unwrap(),
        "--out",
        path2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&path2).unwrap()
    );
}

#[test]
fn bad_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "cases = [\"t2\"]\nnode = 16\n").unwrap();
    let out = run(&["certify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unmet_expectation_exits_one_and_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    // A loose invariance tolerance lets the perturbed control certify, which it must not.
    let out = run(&[
        "certify",
        "--case",
        "t3-perturbed",
        "--nodes",
        "16",
        "--tol-invariance",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = read_json(&path);
    assert_eq!(doc["reports"][0]["verdict"], "CERTIFIED");
    assert_eq!(doc["reports"][0]["expectation_met"], false);
    assert_eq!(doc["all_expectations_met"], false);
}

#[test]
fn existing_output_is_not_clobbered() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    std::fs::write(&path, "keep").unwrap();
    let out = run(&["certify", "--case", "t2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "keep");
    let out = run(&[
        "certify",
        "--case",
        "t2",
        "--out",
        path.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "cases = [\"t2\"]\n").unwrap();
    let out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        cfg.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.path().join(format!("r{threads}.json"));
        let out = bin()
            .env("PI1_OBSTRUCT_THREADS", threads)
            .args([
                "certify",
                "--case",
                "t2,s3-contact,s3-psh",
                "--samples",
                "40000",
                "--seed",
                "42",
                "--out",
            ])
            .arg(&path)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn invalid_thread_count_is_a_usage_error() {
    let out = bin()
        .env("PI1_OBSTRUCT_THREADS", "zero")
        .args(["list"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timings_and_text_csv_formats() {
    let out = run(&["certify", "--case", "t2", "--format", "csv", "--timings"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with("wall_time_ms"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("t2,§4.2,CERTIFIED"));
    assert!(!row.ends_with(','));
    let out = run(&["certify", "--case", "t2", "--format", "text"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("CERTIFIED"));
}

#[test]
fn verify_reports_named_properties() {
    let out = run(&["verify", "loopspace"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["all_passed"], true);
    let names: Vec<&str> = doc["properties"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"iterate scaling n=3"));
    let out = run(&["verify", "geometry"]);
    assert_eq!(out.status.code(), Some(2));
}
