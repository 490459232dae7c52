//! End-to-end runs of the binary: exit codes, artifacts, schemas and
//! reproducibility.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_overtwist"))
}

fn run(args: &[&str], out: &Path) -> i32 {
    let o = bin().args(args).arg("--out").arg(out).output().unwrap();
    if !o.status.success() {
        eprintln!("{}", String::from_utf8_lossy(&o.stderr));
    }
    o.status.code().unwrap()
}

fn schemas() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn validate(schema: &str, file: &Path) {
    let s: Value =
        serde_json::from_str(&fs::read_to_string(schemas().join(format!("{schema}.schema.json"))).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&s).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{} fails {schema}: {errors:?}", file.display());
}

fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn spectrum_on_the_flat_torus() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sp");
    assert_eq!(run(&["spectrum", "--mesh", "torus:24", "--k", "4", "--fiber-length", "1"], &out), 0);
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let first = csv.lines().nth(2).unwrap();
    let nu1: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
    // Cotangent eigenvalue of the unit mode on an n×n grid: 4 sin²(h/2)/h²·… ≈ 1 − h²/12.
    assert!((nu1 - 1.0).abs() < 1e-2, "nu1 = {nu1}");
    assert!(csv.starts_with("# overtwist spectrum config_hash="));
    validate("spectrum", &out.join("spectrum.json"));
    assert!(out.join("product_spectrum.csv").exists());
}

#[test]
fn missing_mesh_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--mesh", "/no/such/mesh.obj"], tmp.path()), 1);
}

#[test]
fn unknown_config_key_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.toml");
    fs::write(&cfg, "mesh = \"torus:16\"\nseed = 1\nbogus = 3\n[sweep]\namplitudes = [0.0]\nwidths = [0.8]\n").unwrap();
    assert_eq!(run(&["certify-sweep", "--config", cfg.to_str().unwrap()], &tmp.path().join("o")), 1);
}

#[test]
fn randomized_commands_need_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["audit-s2", "--subdiv", "1", "--trials", "1"]).arg("--out").arg(tmp.path()).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn nodal_and_classify_artifacts_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let nd = tmp.path().join("nd");
    assert_eq!(run(&["nodal", "--mesh", "torus:24", "--metric", "bump:1.5:0.8"], &nd), 0);
    validate("nodal", &nd.join("nodal.json"));
    assert!(fs::read_to_string(nd.join("nodal_curves.obj")).unwrap().contains("\nl "));
    let cl = tmp.path().join("cl");
    assert_eq!(run(&["classify", "--mesh", "torus:24", "--metric", "bump:1.5:0.8"], &cl), 0);
    validate("verdict", &cl.join("verdict.json"));
}

#[test]
fn sweep_certificate_orbit_test_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "certify-sweep",
        "--mesh",
        "torus:32",
        "--a-grid",
        "0,1.5",
        "--sigma-grid",
        "0.8",
        "--fiber-length",
        "1",
        "--seed",
        "11",
    ];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&args, &a), 0);
    assert_eq!(run(&args, &b), 0);
    assert_eq!(read_tree(&a), read_tree(&b), "reruns differ");

    validate("sweep", &a.join("sweep.json"));
    for e in fs::read_dir(a.join("points")).unwrap() {
        validate("point", &e.unwrap().path());
    }
    let sweep: Value = serde_json::from_str(&fs::read_to_string(a.join("sweep.json")).unwrap()).unwrap();
    let flat = sweep["reports"].as_array().unwrap().iter().find(|r| r["amplitude"] == 0.0).unwrap();
    assert_eq!(flat["verdict"]["classification"], "universally_tight");
    assert_eq!(sweep["meta"]["seed"], 11);

    let cert = a.join("certificate.json");
    assert!(cert.exists(), "no complete certificate at A = 1.5");
    validate("certificate", &cert);
    let orbit = tmp.path().join("orbit");
    let code = run(
        &["orbit-test", "--certificate", cert.to_str().unwrap(), "--samples", "20", "--flows", "4", "--seed", "5"],
        &orbit,
    );
    assert_eq!(code, 0);
    validate("orbit", &orbit.join("orbit.json"));
}

#[test]
fn audit_s2_is_tight() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["audit-s2", "--subdiv", "2", "--trials", "3", "--seed", "2"], tmp.path()), 0);
    validate("audit", &tmp.path().join("audit.json"));
    let a: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(a["overtwisted"], 0);
}
