use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pitchtrack(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pitchtrack")).current_dir(dir).args(args).output().unwrap()
}

fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = pitchtrack(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn manifest(dir: &Path, output: &str) -> Value {
    serde_json::from_str(&read(dir, &format!("{output}.manifest.json"))).unwrap()
}

fn simulated(steps: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["simulate", "--entities", "1", "--steps", steps, "--seed", "7", "--q", "400", "--sigma", "10", "-o", "sim.csv"]);
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn simulate_writes_tracking_csv_and_manifest() {
    let (_guard, dir) = simulated("100");
    let csv = read(&dir, "sim.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("frame,entity_id,x_cm,y_cm"));
    assert_eq!(lines.count(), 100);
    let m = manifest(&dir, "sim.csv");
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["flags"]["steps"][0], "100");
    assert_eq!(m["outputs"][0], "sim.csv");
}

#[test]
fn simulate_is_deterministic() {
    let (_a, a) = simulated("50");
    let (_b, b) = simulated("50");
    assert_eq!(read(&a, "sim.csv"), read(&b, "sim.csv"));
}

#[test]
fn estimate_predict_pipeline() {
    let (_guard, dir) = simulated("40");
    run_ok(&dir, &["estimate", "--input", "sim.csv", "--entity", "1", "--window", "10", "-o", "est.csv"]);
    let est = read(&dir, "est.csv");
    assert!(est.starts_with("window_start,loglik,sigma_x,sigma_y,q11,q21,q12,q22,converged\n"));
    assert_eq!(est.lines().count(), 1 + 30);
    let digest = &manifest(&dir, "est.csv")["input_digests"]["sim.csv"];
    assert_eq!(digest.as_str().unwrap().len(), 64);

    run_ok(&dir, &["predict", "--input", "sim.csv", "--entity", "1", "--window", "10", "--horizon", "5", "--plot", "out.svg", "-o", "pred.csv"]);
    let pred = read(&dir, "pred.csv");
    assert_eq!(pred.lines().count(), 1 + 31 * 5);
    let svg = read(&dir, "out.svg");
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("<rect"));
    run_ok(&dir, &["predict", "--input", "sim.csv", "--entity", "1", "-o", "pred2.csv"]);
    assert_eq!(read(&dir, "pred2.csv"), pred);
}

#[test]
fn json_format() {
    let (_guard, dir) = simulated("30");
    run_ok(&dir, &["kinematics", "--input", "sim.csv", "--entity", "1", "--q", "400", "--sigma", "10", "--format", "json", "-o", "k.json"]);
    let v: Value = serde_json::from_str(&read(&dir, "k.json")).unwrap();
    assert_eq!(v["columns"][5], "speed");
    assert_eq!(v["rows"].as_array().unwrap().len(), 30);
}

#[test]
fn full_series_model_round_trips_through_filter() {
    let (_guard, dir) = simulated("80");
    run_ok(&dir, &["estimate", "--input", "sim.csv", "--entity", "1", "--full-series", "--model-out", "m.json", "-o", "e.csv"]);
    run_ok(&dir, &["filter", "--input", "sim.csv", "--model", "m.json", "-o", "f.csv"]);
    run_ok(&dir, &["filter", "--input", "sim.csv", "--model", "m.json", "--univariate", "-o", "u.csv"]);
    let parse = |s: String| -> Vec<f64> {
        s.lines().skip(1).flat_map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>()).collect()
    };
    let (f, u) = (parse(read(&dir, "f.csv")), parse(read(&dir, "u.csv")));
    assert_eq!(f.len(), u.len());
    assert!(f.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-6 * (1.0 + a.abs())));
}

#[test]
fn vae_train_generate_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run_ok(d, &["vae", "train", "--scripted", "40", "--length", "20", "--epochs", "5", "--seed", "2", "--history", "h.csv", "-o", "vae.json"]);
    assert_eq!(read(d, "h.csv").lines().count(), 6);
    run_ok(d, &["vae", "generate", "--params", "vae.json", "--count", "3", "--seed", "4", "--plot", "g.svg", "-o", "g.csv"]);
    assert_eq!(read(d, "g.csv").lines().count(), 1 + 3 * 20);
    run_ok(d, &["simulate", "--steps", "45", "-o", "s.csv"]);
    run_ok(d, &["vae", "reconstruct", "--params", "vae.json", "--input", "s.csv", "-o", "r.csv"]);
    assert_eq!(read(d, "r.csv").lines().count(), 1 + 2 * 20);
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dir.path(), &["simulate", "--entities", "3", "--steps", "20", "-o", "s.csv"]);
    run_ok(dir.path(), &["plot", "--input", "s.csv", "--entity", "1,3", "-o", "p.svg"]);
    assert!(read(dir.path(), "p.svg").contains("<polyline"));
}

#[test]
fn exit_codes() {
    let (_guard, dir) = simulated("30");
    assert_eq!(pitchtrack(&dir, &["--help"]).status.code(), Some(0));
    assert_eq!(pitchtrack(&dir, &["predict", "--help"]).status.code(), Some(0));
    assert_eq!(pitchtrack(&dir, &["estimate", "--bogus"]).status.code(), Some(1));
    assert_eq!(pitchtrack(&dir, &["frobnicate"]).status.code(), Some(1));

    let missing = pitchtrack(&dir, &["estimate", "--input", "none.csv", "--entity", "1", "-o", "x.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(manifest(&dir, "x.csv")["exit_code"], 2);
    std::fs::write(dir.join("bad.csv"), "frame,entity_id,x_cm,y_cm\n0,1,abc,0\n").unwrap();
    let bad = pitchtrack(&dir, &["plot", "--input", "bad.csv", "-o", "p.svg"]);
    assert_eq!(bad.status.code(), Some(2));

    let model = r#"{"dt":0.1,"entities":[{"mode":"log-cholesky",
        "transition":[[1,0,0.1,0],[0,1,0,0.1],[0,0,1,0],[0,0,0,1]],
        "loading":[[0.005,0],[0,0.005],[0.1,0],[0,0.1]],
        "observation":[[1,0,0,0],[0,1,0,0]],
        "accel_cov":[[1e-12,0],[0,1e-12]],"sigma":[1000.0,1e-5]}]}"#;
    std::fs::write(dir.join("ill.json"), model).unwrap();
    let ill = pitchtrack(&dir, &["filter", "--input", "sim.csv", "--model", "ill.json", "-o", "f.csv"]);
    assert_eq!(ill.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&ill.stderr);
    assert!(stderr.contains("kalman") && stderr.contains("step"), "{stderr}");
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = pitchtrack(dir.path(), &["estimate", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("--window") && text.contains("[default: 10]"), "{text}");
    let out = pitchtrack(dir.path(), &["vae", "train", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[default: 0.15]") && text.contains("[default: 200]"), "{text}");
}
