use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn qpw(args: &[&str], spec: &Path, extra_env: Option<(&str, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qpw"));
    cmd.args(&args[..1]).arg("--spec").arg(spec).args(&args[1..]);
    if let Some((k, v)) = extra_env {
        cmd.env(k, v);
    }
    cmd.output().expect("qpw runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn closed_form_solve_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = dir.path().to_str().unwrap();
    let run = out_dir.to_str().unwrap();
    let o = qpw(&["solve", "--out", run, "--dump-g", "--resolution", "8x16"], &data("n1.json"), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["accepted"], Value::Bool(true));
    assert!(report["solution"]["identity_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(report["provenance"]["spec_hash"].as_str().unwrap().len(), 64);
    assert!(out_dir.join("timings.json").exists());
    assert_eq!(fs::read_to_string(out_dir.join("g.csv")).unwrap().lines().count(), 1 + 8 * 16);

    let report_path = out_dir.join("report.json");
    let verify_dir = format!("{out}/verify");
    let o = qpw(&["verify", "--out", &verify_dir], &report_path, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = read_json(&Path::new(&verify_dir).join("verification.json"));
    assert_eq!(v["reproduced"], Value::Bool(true));
    assert_eq!(v["g_csv_rows"], 128);

    // a doctored residual no longer reproduces
    let mut doctored = report.clone();
    doctored["solution"]["identity_residual"] = Value::from(1e-3);
    fs::write(&report_path, serde_json::to_string_pretty(&doctored).unwrap()).unwrap();
    let o = qpw(&["verify"], &report_path, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solution.identity_residual"), "{}", stderr(&o));
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (i, threads) in ["1", "2", "1"].iter().enumerate() {
        let run = dir.path().join(format!("run{i}"));
        let o = qpw(
            &["solve", "--out", run.to_str().unwrap(), "--grid", "32x128"],
            &data("n2.json"),
            Some(("QPW_THREADS", threads)),
        );
        assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
        texts.push(fs::read(run.join("report.json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert_eq!(texts[0], texts[2]);
}

#[test]
fn certificate_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = read_json(&data("n1.json"));
    spec["tolerances"]["analyticity"] = Value::from(1e-20);
    let path = dir.path().join("strict.json");
    fs::write(&path, spec.to_string()).unwrap();
    let o = qpw(&["solve"], &path, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("analyticity"));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["accepted"], Value::Bool(false));
}

#[test]
fn size_violation_and_common_zero_are_input_errors() {
    let o = qpw(&["solve"], &data("bad_size.json"), None);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("size condition |g|^2 <= sum |f_j|^2 fails at 0+0i"), "{msg}");

    let o = qpw(&["solve"], &data("common_zero.json"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("degenerate input"), "{}", stderr(&o));
}

#[test]
fn schema_errors_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut spec = read_json(&data("n1.json"));
    spec["grid"]["n_radial"] = Value::from("many");
    fs::write(&path, spec.to_string()).unwrap();
    let o = qpw(&["solve"], &path, None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("grid.n_radial"), "{}", stderr(&o));

    let o = qpw(&["solve"], &dir.path().join("missing.json"), None);
    assert_eq!(o.status.code(), Some(1));

    let o = qpw(&["solve", "--p", "1.5"], &data("n1.json"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at p"), "{}", stderr(&o));
}

#[test]
fn unit_density_box_norm_is_pi() {
    let o = qpw(&["carleson", "--p", "0.5"], &data("unit_density.json"), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let value = report["box"]["value"].as_f64().unwrap();
    assert!((value - PI).abs() <= 0.02 * PI, "{value}");
    assert_eq!(report["arc_level"], 9);
    assert!(report["box"]["witness"].is_object());
}

#[test]
fn qpnorm_lists_every_function() {
    let o = qpw(&["qpnorm", "--grid", "32x128"], &data("blaschke_modulus.json"), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let norms = report["norms"].as_array().unwrap();
    assert_eq!(norms.len(), 1);
    // |b| = 1 on the circle
    let l2 = norms[0]["report"]["boundary_l2"].as_f64().unwrap();
    assert!((l2 - 1.0).abs() < 1e-12);
}

#[test]
fn plots_are_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = qpw(
            &["plot", "--plot", "abs_g", "--out", d.to_str().unwrap(), "--resolution", "10x24"],
            &data("blaschke_modulus.json"),
            None,
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let svg = fs::read(a.join("abs_g.svg")).unwrap();
    assert_eq!(svg, fs::read(b.join("abs_g.svg")).unwrap());
    let csv = fs::read_to_string(a.join("abs_g.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10 * 24);
    for row in rows.iter().filter(|r| r[0] == 1.0) {
        assert!((row[2] - 1.0).abs() <= 1e-6);
    }

    let o = qpw(
        &["plot", "--plot", "residual", "--out", a.to_str().unwrap(), "--resolution", "6x12"],
        &data("n1.json"),
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(a.join("residual.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v <= 1e-12);
    }

    let o = qpw(&["plot", "--plot", "nonsense", "--out", a.to_str().unwrap()], &data("n1.json"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"));
}
