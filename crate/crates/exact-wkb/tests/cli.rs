use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_exact-wkb");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const AIRY: &str = r#"{"Q": [{"num": [[0, 0], [1, 0]]}], "basepoint": {"x": [1, 0]}, "params": {"radius": 10}}"#;

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_linear_potential() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "airy.json", AIRY);
    let out = dir.path().join("out");
    let o = run(&["classify", &spec, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out.join("classify.json"));
    let cps = v["critical_points"].as_array().unwrap();
    assert_eq!(cps.len(), 2);
    assert_eq!(cps[0]["kind"], "zero");
    assert_eq!(cps[0]["order"], 1);
    assert_eq!(cps[1]["location"], "infinity");
    assert_eq!(cps[1]["order"], 5);
    assert_eq!(v["simple"], true);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selftest", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS") && !stdout.contains("FAIL"));
}

#[test]
fn malformed_spec_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "bad.json", "{\"Q\": [{\"num\": [[0,0],\n [1,0]}]}");
    let o = run(&["classify", &spec, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2 column"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "bad.json", r#"{"Q": [{"num": [[1, 0]]}], "params": {"ordr": 4}}"#);
    let o = run(&["coeffs", &spec, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ordr"));
}

#[test]
fn out_of_range_flag_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "airy.json", AIRY);
    let o = run(&["borel-continue", &spec, "--hbar", "-1", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic_and_manifested() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "airy.json", AIRY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["coeffs", &spec, "--order", "8", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = json(&a.join("manifest.json"));
    let files = manifest["outputs"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let name = f["file"].as_str().unwrap();
        let bytes = fs::read(a.join(name)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), f["sha256"].as_str().unwrap());
        assert_eq!(bytes, fs::read(b.join(name)).unwrap(), "{name} differs between runs");
    }
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    assert_eq!(manifest["parameters"]["order"], 8);
}
