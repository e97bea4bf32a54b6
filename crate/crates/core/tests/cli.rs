use std::process::{Command, Output};

use serde_json::Value;

fn tanno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanno")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn curve_three_samples_start_at_the_weights() {
    let out = tanno(&["curve", "--a", "0.5", "--samples", "3", "--out", "-"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 3);
    let r3 = 3f64.sqrt();
    let p: Vec<f64> = samples[0]["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((p[0] - ((r3 + 1.0) / (2.0 * r3)).sqrt()).abs() < 1e-15);
    assert!((p[1] - ((r3 - 1.0) / (2.0 * r3)).sqrt()).abs() < 1e-15);
    assert_eq!(&p[2..], &[0.0, 0.0]);
    for s in samples {
        let n: f64 = s["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap().powi(2)).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
    assert_eq!(v["meta"]["c"].as_f64(), Some(5.0));
    assert_eq!(v["meta"]["frame"].as_array().unwrap().len(), 8);
}

#[test]
fn out_of_range_parameter_fails() {
    let out = tanno(&["curve", "--a", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("OutOfRange"));
}

#[test]
fn curve_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = tanno(&["curve", "--samples", "5", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next(), Some("s,p1,p2,p3,p4,dp1,dp2,dp3,dp4"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn cylinder_obj_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cyl.obj");
    let out = tanno(&["cylinder", "--a", "0.4", "--grid", "32", "--format", "obj", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 1024);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 31 * 31);
}

#[test]
fn cylinder_json_grid_is_periodic() {
    let out = tanno(&["cylinder", "--grid", "8"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let verts = v["vertices"].as_array().unwrap();
    assert_eq!(verts.len(), 64);
    let p = |i: usize| -> Vec<f64> { verts[i]["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
    let (first, last) = (p(0), p(63));
    for k in 0..4 {
        assert!((first[k] - last[k]).abs() < 1e-10);
    }
}

#[test]
fn obj_is_only_for_cylinders() {
    assert!(!tanno(&["curve", "--format", "obj"]).status.success());
}

#[test]
fn geodesic_reports_prediction() {
    let out = tanno(&["geodesic", "--c1", "0.6", "--c2", "0.8", "--samples", "4"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("predicted |tau|"));
    let bad = tanno(&["geodesic", "--c1", "0.6", "--c2", "0.6"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("InvalidDirection"));
}

#[test]
fn cv_writes_three_dimensional_samples() {
    let out = tanno(&["cv", "--l", "2", "--m", "4", "--samples", "3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next(), Some("s,p1,p2,p3,dp1,dp2,dp3"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("variant search"));
}

#[test]
fn verify_passes_and_writes_deterministic_json() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let path = dir.path().join(name);
        let out = tanno(&["verify", "--a", "0.5", "--json", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stdout(&out));
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("runtime_ms");
        v
    };
    let (first, second) = (read("a.json"), read("b.json"));
    assert_eq!(first, second);
    assert_eq!(first["pass"], Value::Bool(true));
    let checks = first["checks"].as_array().unwrap();
    assert!(checks.len() >= 40);
    for c in checks {
        for key in ["name", "paper_label", "residual", "tol", "pass", "asserted"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn verify_near_round_sphere_reports_guard() {
    let out = tanno(&["verify", "--a", "0.999", "--samples", "10"]);
    let text = stdout(&out);
    assert!(text.contains("ill-conditioned"));
    assert!(out.status.success());
}

#[test]
fn verify_rejects_nonpositive_tolerance() {
    let out = tanno(&["verify", "--tol-oracle", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
