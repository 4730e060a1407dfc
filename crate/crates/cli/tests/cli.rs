use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use dunkl_core::dunkl::{FieldContainer, SampledField, TensorGrid};
use serde_json::Value;

fn dunkl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunkl")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classical_poisson_at_origin() {
    let out = dunkl(&["kernel", "--type", "poisson", "--k", "0", "--t", "1", "--x", "0", "--y", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# runconfig-v1 sha256="));
    assert_eq!(lines.next().unwrap(), "t,x0,y0,kernel,comparand,ratio");
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[3] - 0.3183099).abs() < 1e-7);
}

#[test]
fn kernel_rows_agree_with_comparands() {
    for args in [
        vec!["kernel", "--type", "heat", "--k", "1.5", "--t", "0.3,1,4", "--x", "0.4", "--y", "-2"],
        vec!["kernel", "--type", "poisson", "--k", "0.5,1", "--t", "0.7", "--x", "1,-1", "--y", "0.2,0.3"],
        vec!["kernel", "--type", "dunkl", "--k", "0.3,2.5", "--x", "1.5,-3", "--y", "-2,0.5"],
    ] {
        let out = dunkl(&args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        for line in text.lines().skip(2) {
            let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((ratio - 1.0).abs() < 1e-8, "{args:?}: {line}");
        }
    }
}

#[test]
fn negative_multiplicity_is_a_config_error() {
    assert_eq!(dunkl(&["kernel", "--k", "-1"]).status.code(), Some(2));
    assert_eq!(dunkl(&["verify-lemma", "--k", "0.5,-0.1"]).status.code(), Some(2));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"schema":"runconfig-v1","k":[0],"seed":3,"params":{"type":"poisson","t":[2.0]}}"#).unwrap();
    let out = dunkl(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(2).unwrap();
    let kernel: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((kernel - 2.0 / (std::f64::consts::PI * 4.0)).abs() < 1e-10);

    let out = dunkl(&["kernel", "--config", cfg.to_str().unwrap(), "--t", "1"]);
    let row = String::from_utf8(out.stdout).unwrap().lines().nth(2).unwrap().to_string();
    let kernel: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((kernel - 1.0 / std::f64::consts::PI).abs() < 1e-10);

    std::fs::write(&cfg, r#"{"schema":"runconfig-v2"}"#).unwrap();
    assert_eq!(dunkl(&["kernel", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"k":[1],"bogus":1}"#).unwrap();
    assert_eq!(dunkl(&["kernel", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn lemma_report_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = dunkl(&["verify-lemma", "--n", "2", "--eps", "0.1", "--samples", "20000", "--seed", "42", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = json(&a);
    assert_eq!(v["passed"], Value::Bool(true));
    let delta = v["report"]["delta"].as_f64().unwrap();
    assert!(delta > 0.0 && delta <= 0.1);
    assert_eq!(v["report"]["worst_matrix"].as_array().unwrap().len(), 3);
    assert_eq!(v["fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn fingerprint_ignores_output_path_but_tracks_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let run = |eps: &str, name: &str| {
        let p = dir.path().join(name);
        dunkl(&["verify-lemma", "--n", "1", "--eps", eps, "--samples", "2000", "--out", p.to_str().unwrap()]);
        json(&p)["fingerprint"].as_str().unwrap().to_string()
    };
    assert_eq!(run("0.1", "x.json"), run("0.1", "y.json"));
    assert_ne!(run("0.1", "x.json"), run("0.2", "y.json"));
}

#[test]
fn riesz_of_an_even_field_is_odd() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Arc::new(TensorGrid::uniform(&[1.0], 8.0, 0.1, false).unwrap());
    let f = SampledField::from_fn(Arc::clone(&grid), |x| (-x[0] * x[0]).exp());
    let input = dir.path().join("f.json");
    let output = dir.path().join("rf.json");
    std::fs::write(&input, f.to_container().to_json()).unwrap();
    let out = dunkl(&["riesz", "--field", input.to_str().unwrap(), "--j", "0", "--out", output.to_str().unwrap()]);
    assert!(out.status.success());
    let r = SampledField::from_container(FieldContainer::from_json(&std::fs::read_to_string(&output).unwrap()).unwrap()).unwrap();
    let m = r.len();
    for i in 0..m {
        assert!((r.values[i] + r.values[m - 1 - i]).abs() < 1e-10);
    }
    assert!(r.max_abs() > 0.1);
    assert_eq!(dunkl(&["riesz", "--field", input.to_str().unwrap(), "--j", "1"]).status.code(), Some(2));
}

#[test]
fn scan_exit_codes_follow_violations() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scan.json");
    let base = ["subharmonic-scan", "--k", "1", "--extent", "5", "--spacing", "0.1", "--t-count", "15", "--t-min", "0.3", "--dt", "0.1"];
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--q", "0.95", "--out", p.to_str().unwrap()]);
    assert_eq!(dunkl(&args).status.code(), Some(0));
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--q", "0.05", "--out", p.to_str().unwrap()]);
    assert_eq!(dunkl(&args).status.code(), Some(1));
    let v = json(&p);
    assert_eq!(v["passed"], Value::Bool(false));
    assert!(v["report"]["violation_count"].as_u64().unwrap() > 0);
    assert!(!v["failures"].as_array().unwrap().is_empty());
    assert_eq!(dunkl(&["subharmonic-scan", "--q", "1.5"]).status.code(), Some(2));
}

#[test]
fn hardy_csv_columns_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = dunkl(&["hardy-ratio", "--atoms", "3", "--seed", "7", "--extent", "12", "--spacing", "0.1", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["atom_id", "center", "radius", "l1", "riesz_l1_sum", "maximal_l1", "ratio"]);
    assert_eq!(rdr.records().count(), 3);
}

#[test]
fn transform_cr_and_fold_reports_pass() {
    for args in [
        vec!["transform", "--k", "0.5"],
        vec!["verify-cr", "--k", "0.5", "--extent", "3", "--spacing", "0.05"],
        vec!["bessel-fold", "--k", "1.5", "--nodes", "20"],
    ] {
        let out = dunkl(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["passed"], Value::Bool(true), "{args:?}");
    }
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_dunkl")).env("DUNKL_THREADS", "zero").args(["kernel", "--k", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_dunkl")).env("DUNKL_THREADS", "1").args(["kernel", "--k", "0"]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn quick_acceptance_suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = dunkl(&["verify-all", "--quick", "--seed", "5", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8(out.stderr).unwrap().matches("PASS").count(), 12);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(json(&a)["report"]["results"].as_array().unwrap().len(), 12);
}
