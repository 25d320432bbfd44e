use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use balescu::verify::SQRT_8PI;
use balescu::PlasmaConfig;

fn balescu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balescu")).args(args).output().expect("spawn balescu")
}

fn stdout(args: &[&str]) -> String {
    let out = balescu(args);
    assert!(out.status.success(), "balescu {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, body)
}

#[test]
fn dispersion_table_matches_library() {
    let (header, body) = rows(&stdout(&["dispersion", "--points", "11"]));
    assert_eq!(header, ["x", "psi_r", "psi_i", "x2_psi_r", "eps_re_at_k1", "eps_im_at_k1"]);
    assert_eq!(body.len(), 11);
    assert_eq!(body[0], [0.0, 1.0, 0.0, 0.0, 2.0, 0.0]);
    let plasma = PlasmaConfig::with_k0(1.0).unwrap();
    for row in &body {
        let p = plasma.psi(row[0]);
        assert_eq!(row[1].to_bits(), p.re.to_bits());
        assert_eq!(row[2], p.im);
    }
}

#[test]
fn jay_ratio_column() {
    let (header, body) = rows(&stdout(&["jay", "--from", "0", "--to", "12", "--points", "4"]));
    assert_eq!(header, ["x", "J", "J_scaled", "J_oracle", "ratio_x3e"]);
    let last = body.last().unwrap();
    assert_eq!(last[0], 12.0);
    assert!((last[4] / SQRT_8PI - 1.0).abs() < 0.03);
    for row in &body {
        assert!((row[1] - row[3]).abs() <= 1e-7 * row[3].abs());
    }
    assert!(!balescu(&["jay", "--to", "30"]).status.success());
}

#[test]
fn frequency_table_starts_degenerate() {
    let (header, body) = rows(&stdout(&["freq", "--to", "2", "--points", "3"]));
    assert_eq!(header, ["r", "lambda1", "lambda2", "dlambda1", "dlambda2", "ratio_l1", "r_lambda2"]);
    assert_eq!(body[0][1], body[0][2]);
    assert!((body[0][1] - 0.161_382_727_985_606).abs() < 1e-8);
    assert_eq!(&body[0][3..5], &[0.0, 0.0]);
}

#[test]
fn kernel_first_row_is_antipodal_pair() {
    let (header, body) = rows(&stdout(&["kernel", "--samples", "3"]));
    assert_eq!(header.len(), 22);
    assert_eq!(body.len(), 4);
    let b = &body[0][10..16];
    assert_eq!(b[0], 0.0);
    assert!((b[3] - 0.151_697_440_877_176).abs() < 1e-6);
    assert_eq!(b[3], b[5]);
}

#[test]
fn evolve_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = out.to_str().unwrap();
    stdout(&["--t-end", "0.2", "--m", "40", "--out", o, "evolve", "--preset", "shell"]);
    let (header, body) = rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["t", "mass", "energy", "l2", "weighted", "sigma_norm"]);
    assert_eq!(body[0][0], 0.0);
    assert!(body.windows(2).all(|w| w[1][3] <= w[0][3]));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.summary.json")).unwrap()).unwrap();
    for key in ["preset", "fitted_p", "mass_drift", "energy_drift", "monotone", "dt", "steps", "metadata"] {
        assert!(summary.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(summary["preset"], "shell");
    assert_eq!(summary["m"], 40);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["--seed", "11", "kernel", "--samples", "20"];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["--t-end", "0.1", "--m", "30", "evolve"];
    assert_eq!(balescu(&args).stdout, balescu(&args).stdout);
}

#[test]
fn config_file_below_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\nk0 = 2\nformat = json\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = stdout(&["--config", c, "freq", "--points", "2"]);
    let json: serde_json::Value = serde_json::from_str(&from_file).unwrap();
    assert!(json[0].get("lambda1").is_some());
    let flags = stdout(&["--config", c, "--k0", "1", "--format", "csv", "freq", "--points", "2"]);
    assert_eq!(flags, stdout(&["freq", "--points", "2"]));
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(balescu(&["--config", c, "freq"]).status.code(), Some(2));
}

#[test]
fn invalid_input_exits_nonzero() {
    for args in [
        &["dispersion", "--from", "3", "--to", "1"][..],
        &["dispersion", "--points", "1"],
        &["--k0", "-1", "jay"],
        &["--theta", "2", "--q", "1.5", "freq"],
        &["--n", "4", "verify", "--group", "dispersion"],
        &["evolve", "--preset", "nope"],
        &["--out", "/nonexistent/dir/x.csv", "dispersion"],
    ] {
        let out = balescu(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}

#[test]
fn verify_group_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = out.to_str().unwrap();
    let run = balescu(&["--format", "json", "--out", o, "verify", "--group", "dispersion"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!report.is_empty());
    for check in &report {
        let keys: Vec<&str> = check.keys().map(String::as_str).collect();
        let mut want = vec!["name", "target", "achieved", "tolerance", "pass", "runtime_s"];
        want.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, want);
    }
    assert!(Path::new(&dir.path().join("report.observations.json")).exists());

    let strict = balescu(&["verify", "--group", "dispersion", "--tol", "dispersion.x2_psi_r_x20=1e-12"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("FAIL dispersion.x2_psi_r_x20"));
    let unknown = balescu(&["verify", "--group", "dispersion", "--tol", "no.such=1"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn manifest_constants() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["manifest"])).unwrap();
    let c = &v["constants"];
    assert_eq!(c["sqrt_8pi"].as_f64().unwrap(), SQRT_8PI);
    assert_eq!(c["two_pi"].as_f64().unwrap(), std::f64::consts::TAU);
    assert_eq!(c["decay_exponents"]["2"].as_f64().unwrap(), 2.0 / 3.0);
    assert!(v["checks"].as_array().unwrap().len() > 30);
}
