use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lamperti::config::RunConfig;
use lamperti::theory::lambda_const;

fn lamperti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamperti"))
        .args(args)
        .env("LAMPERTI_THREADS", "2")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let out = dir.join("out");
    let text = body.replace("@OUT@", out.to_str().unwrap());
    let path = dir.join("cfg.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
    "model": {"type": "bd", "beta": 0.5, "rho": 0.5},
    "engine": {"n_traj": 200, "horizon": 100000, "base_seed": 5, "grid_points": 25, "record_paths": 2},
    "checks": [{"name": "lln", "tolerance": 0.1}, {"name": "escape_exponent", "tolerance": 0.05}],
    "output": {"dir": "@OUT@", "formats": ["json", "csv"]}
}"#;

#[test]
fn theory_prints_constants() {
    let out = lamperti(&["theory", "--rho", "0.5", "--beta", "0.5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lambda"].as_f64().unwrap(), lambda_const(0.5, 0.5).unwrap());
    assert!((v["clt_std"].as_f64().unwrap() - 0.6f64.sqrt()).abs() < 1e-12);

    let out = lamperti(&["theory", "--rho", "0.5", "--beta", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--beta"), "{err}");

    let out = lamperti(&["theory", "--rho", "0.5", "--beta", "0.5", "--gamma", "2.5", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["transience_ok"].as_bool().unwrap());
    assert!(!v["sharp_bounds_ok"].as_bool().unwrap());
}

#[test]
fn verify_writes_report_matching_theory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = lamperti(&["verify", &cfg]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS  lln"));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["predicted_lambda"].as_f64().unwrap(), lambda_const(0.5, 0.5).unwrap());
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    let checks = fs::read_to_string(dir.path().join("out/checks.csv")).unwrap();
    assert!(checks.starts_with("name,pass,"));
    assert_eq!(checks.lines().count(), 3);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A driftless chain is recurrent, so transience must fail.
    let body = SMALL
        .replace("\"rho\": 0.5", "\"rho\": 0.0")
        .replace(r#"[{"name": "lln", "tolerance": 0.1}, {"name": "escape_exponent", "tolerance": 0.05}]"#, r#"[{"name": "transience"}]"#);
    let cfg = write_config(dir.path(), &body);
    let out = lamperti(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn simulate_outputs_stay_in_the_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = lamperti(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let mut top: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    top.sort();
    assert_eq!(top, ["cfg.json", "out"]);
    let mut files: Vec<_> = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["manifest.json", "paths.csv", "records.csv"]);

    let records = fs::read(dir.path().join("out/records.csv")).unwrap();
    assert!(!records.contains(&b'\r'));
    let text = String::from_utf8(records).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("traj_id,t,x,running_max"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[..2], ["0", "1"]);
    assert_eq!(first[2].parse::<f64>().unwrap(), 1.0);

    let paths = fs::read_to_string(dir.path().join("out/paths.csv")).unwrap();
    assert_eq!(paths.lines().count(), 1 + 2 * 100_001);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    let echoed = serde_json::to_string(&manifest["config"]).unwrap();
    let original = RunConfig::from_path(Path::new(&cfg)).unwrap();
    assert_eq!(RunConfig::from_json(&echoed).unwrap(), original);
    assert_eq!(manifest["config_hash"].as_str().unwrap(), original.hash());
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 16);
}

#[test]
fn simulate_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_lamperti"))
            .args(["simulate", &cfg])
            .env("LAMPERTI_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read(dir.path().join("out/records.csv")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"beta\": 0.5", "\"beta\": 1.2"));
    let out = lamperti(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.beta"));

    let cfg = write_config(dir.path(), &SMALL.replace("\"base_seed\": 5", "\"base_seed\": 5, \"seed\": 1"));
    let out = lamperti(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let out = lamperti(&["verify", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = lamperti(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn drift_fit_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("steps.csv");
    let mut text = String::from("x,dx\n");
    for k in 0..40 {
        let x = 10f64.powf((k as f64 + 0.5) / 10.0);
        let mu = 0.5 * x.powf(-0.5);
        for _ in 0..5000 {
            text.push_str(&format!("{x},{}\n{x},{}\n", mu + 1.0, mu - 1.0));
        }
    }
    fs::write(&csv, text).unwrap();
    let outdir = dir.path().join("fit");
    let out = lamperti(&["drift-fit", "--input", csv.to_str().unwrap(), "--out", outdir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["beta_hat"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((v["rho_hat"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(outdir.join("drift_bins.csv").exists());
    assert!(outdir.join("drift_fit.json").exists());
}

#[test]
fn drift_fit_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(lamperti(&["drift-fit", "--input", empty.to_str().unwrap()]).status.code(), Some(2));

    let header = dir.path().join("header.csv");
    fs::write(&header, "x,dx\n").unwrap();
    assert_eq!(lamperti(&["drift-fit", "--input", header.to_str().unwrap()]).status.code(), Some(2));

    // Every transition in a single bin: no slope to fit.
    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "x,dx\n".to_string() + &"3.0,0.1\n".repeat(200)).unwrap();
    let out = lamperti(&["drift-fit", "--input", flat.to_str().unwrap(), "--min-transitions", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}
