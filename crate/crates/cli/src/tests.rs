use std::f64::consts::PI;
use std::path::Path;

use serde_json::Value;

/// Runs `htm <args> --out <out>`; `Err` holds the exit code and diagnostic.
fn htm(args: &[&str], out: &Path) -> Result<(), (u8, String)> {
    let out = out.to_str().unwrap();
    crate::execute(["htm"].iter().chain(args).chain(&["--out", out]))
}

fn code(r: &Result<(), (u8, String)>) -> u8 {
    r.as_ref().map_or_else(|e| e.0, |_| 0)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn eigen_default_and_alpha_independence() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = htm(&["eigen", "--alpha", "0"], &a);
    let rb = htm(&["eigen", "--alpha", "1"], &b);
    assert!(ra.is_ok() && rb.is_ok());
    assert_eq!(std::fs::read(a.join("eigen.json")).unwrap(), std::fs::read(b.join("eigen.json")).unwrap());
    let rec = read_json(&a.join("eigen.json"));
    let l = rec["lambda1"].as_f64().unwrap();
    assert!(l > 0.0 && l <= 3.0);
    assert_eq!(rec["grid"]["n"], 4000);
    assert_eq!(rec["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    for (text, field) in
        [(r#"{"n": 500, "gama": [1]}"#, "gama"), (r#"{"tol": "small"}"#, "tol"), (r#"{"tol": -1}"#, "tol")]
    {
        std::fs::write(&cfg, text).unwrap();
        let r = htm(&["eigen", "--config", cfg.to_str().unwrap()], dir.path());
        let (c, msg) = r.unwrap_err();
        assert_eq!(c, 2);
        assert!(msg.contains(field), "{text}: {msg}");
    }
}

#[test]
fn sweep_rows_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let one = htm(&["sweep", "--n", "1500", "--gammas", "2pi"], dir.path());
    assert!(one.is_ok());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "gamma,alpha,J,lambda_eps,c_eps,norm,residual,iters");
    assert_eq!(lines.len(), 2);
    let j: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(j > PI);

    let three = htm(&["sweep", "--n", "1500", "--gammas", "3.5pi,2pi,3pi", "--format", "json"], dir.path());
    assert!(three.is_ok());
    let doc = read_json(&dir.path().join("sweep.json"));
    let js: Vec<f64> = doc["rows"].as_array().unwrap().iter().map(|r| r["record"]["J"].as_f64().unwrap()).collect();
    assert_eq!(js.len(), 3);
    assert!(js.windows(2).all(|p| p[1] > p[0]));
    let hash = doc["config_hash"].as_str().unwrap();
    assert!(doc["rows"].as_array().unwrap().iter().all(|r| r["config_hash"] == hash));

    assert_eq!(code(&htm(&["sweep", "--gammas", ""], dir.path())), 2);
    assert_eq!(code(&htm(&["sweep", "--gammas", "4pi"], dir.path())), 2);
    assert_eq!(code(&htm(&["sweep", "--jobs", "x"], dir.path())), 2);
}

#[test]
fn sweep_output_does_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["sweep", "--n", "800", "--gammas", "pi,2pi,3pi,3.5pi"];
    assert!(htm(&[&args[..], &["--jobs", "1"]].concat(), &a).is_ok());
    assert!(htm(&[&args[..], &["--jobs", "4"]].concat(), &b).is_ok());
    for f in ["sweep.csv", "sweep.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn testfn_pass_and_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = htm(&["testfn", "--eps", "1e-4", "--alpha", "0"], dir.path());
    assert!(r.is_ok());
    let doc = read_json(&dir.path().join("testfn.json"));
    assert_eq!(doc["pass"], true);
    let rep = &doc["reports"][0];
    assert!(rep["margin"].as_f64().unwrap() > 0.0);
    let a0 = rep["A0"].as_f64().unwrap();
    let bound = rep["bound"].as_f64().unwrap();
    assert!((bound - (PI + PI * (1.0 + 4.0 * PI * a0).exp())).abs() <= 1e-12 * bound);

    htm(&["eigen"], dir.path()).unwrap();
    let l = read_json(&dir.path().join("eigen.json"))["lambda1"].as_f64().unwrap();
    let (c, msg) = htm(&["testfn", "--eps", "1e-4", "--alpha", &(2.0 * l).to_string()], dir.path()).unwrap_err();
    assert_eq!(c, 2);
    assert!(msg.contains("admissible"));
}

#[test]
fn green_maximize_and_bubble_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = htm(&["green", "--alpha-fraction", "0.5", "--format", "json"], dir.path());
    assert!(g.is_ok());
    let doc = read_json(&dir.path().join("green.json"));
    assert!(doc["record"]["A0"].as_f64().unwrap() > 0.5);
    assert!(!dir.path().join("green.csv").exists());

    let m = htm(&["maximize", "--n", "1000", "--gamma", "3pi", "--format", "csv"], dir.path());
    assert!(m.is_ok());
    let prof = std::fs::read_to_string(dir.path().join("maximizer.csv")).unwrap();
    assert!(prof.starts_with("r,value\n"));
    assert_eq!(prof.lines().count(), 1001);

    let b = htm(&["bubble", "--format", "both"], dir.path());
    assert!(b.is_ok());
    let d = read_json(&dir.path().join("bubble.json"));
    assert!(d["diagnostics"]["sup_deviation"].as_f64().unwrap() < 0.05);
    let meta = read_json(&dir.path().join("metadata.json"));
    assert_eq!(meta["command"], "bubble");
    assert_eq!(meta["config_hash"], d["config_hash"]);
}
