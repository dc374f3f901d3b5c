use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn specs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn spectral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral")).args(args).output().expect("binary runs")
}

fn spec(name: &str) -> String {
    specs().join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str, body: &str) -> String {
    let p = std::env::temp_dir().join(format!("spectral-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn airy_theorem_check_passes() {
    let out = spectral(&[&spec("airy.json"), "theorem-check", "--targets", "0,3;1,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["theorem_check"]["all_equal"], true);
    assert_eq!(r["theorem_check"]["targets"]["0,3"]["keys"]["(0,0),(0,0),(0,0)"]["recursion"], "1/2");
    assert_eq!(r["theorem_check"]["targets"]["1,1"]["keys"]["(0,1)"]["theorem"], "1/24");
    assert!(r.get("timing").is_some());
}

#[test]
fn malformed_specs_exit_two() {
    let cases = [
        ("json", "{ not json"),
        ("unknown", r#"{"name":"a","field":"rational","builtin":{"name":"airy"},"commands":["graphs"],"targets":[[0,3]],"x":1}"#),
        ("nosource", r#"{"name":"a","field":"rational","commands":["graphs"],"targets":[[0,3]]}"#),
        ("field", r#"{"name":"a","field":"octonion","builtin":{"name":"airy"},"commands":["graphs"],"targets":[[0,3]]}"#),
        ("target", r#"{"name":"a","field":"rational","builtin":{"name":"airy"},"commands":["graphs"],"targets":[[0,2]]}"#),
        ("builtin", r#"{"name":"a","field":"rational","builtin":{"name":"nope"},"commands":["graphs"],"targets":[[0,3]]}"#),
        ("kernel", r#"{"name":"a","field":"rational","parametric":{"x":{"num":[0,0,1]},"y":{"num":[0,1]},"B":[[1]],"branchpoints":[0]},"commands":["graphs"],"targets":[[0,3]]}"#),
    ];
    for (name, body) in cases {
        let out = spectral(&[&scratch(name, body)]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(out.stdout.is_empty());
        assert!(String::from_utf8_lossy(&out.stderr).contains("spec error"), "{name}");
    }
    assert_eq!(spectral(&["/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(spectral(&[&spec("airy.json"), "--orders", "depth=3"]).status.code(), Some(2));
}

#[test]
fn ising_closed_forms_report_the_known_row_factor() {
    let out = spectral(&[&spec("ising.json"), "closed-form-check"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closed_form_checks"));
    let checks = &report(&out)["closed_form_checks"]["ising"]["checks"];
    assert_eq!(checks["bhat_row"]["passes"], false);
    assert_eq!(checks["bhat_row"]["ratios"][2], "5");
    assert_eq!(checks["reflection"]["passes"], true);
    assert_eq!(checks["bhat_cross_row"]["passes"], true);
}

#[test]
fn ising_theorem_check_passes() {
    let out = spectral(&[&spec("ising.json"), "theorem-check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["theorem_check"]["all_equal"], true);
}

#[test]
fn missing_radical_is_a_compute_error() {
    let out = spectral(&[&spec("ising.json"), "local-data", "--field", "rational"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("local_data"));
    let short = spectral(&[&spec("airy.json"), "--orders", "bergman=2,times=0"]);
    assert_eq!(short.status.code(), Some(3));
}

#[test]
fn thread_count_changes_timing_only() {
    let run = |threads: &str| {
        let out = spectral(&[&spec("ising.json"), "local-data", "theorem-check", "--threads", threads]);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(without_timing(serde_json::from_slice(&one).unwrap()), without_timing(serde_json::from_slice(&four).unwrap()));
}

#[test]
fn exact_scalars_round_trip_through_the_report() {
    let out = spectral(&[&spec("ising.json"), "local-data"]);
    let r = report(&out);
    let bhat = r["local_data"]["bhat"].as_object().unwrap();
    assert_eq!(bhat["(0,0;0,0)"], "1/144");
    use spectral_core::ring::{Scalar, Surd};
    for v in bhat.values() {
        let s = v.as_str().unwrap();
        assert_eq!(Surd::from_text(s).unwrap().to_text(), s);
    }
}

#[test]
fn parametric_curve_and_out_file() {
    let path = std::env::temp_dir().join(format!("spectral-{}-out.json", std::process::id()));
    let out = spectral(&[&spec("parametric_airy.json"), "--out", &path.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["graphs"]["0,4"]["count"], 4);
    assert_eq!(r["intersection"]["1,1"]["psi"]["1"], "1/24");
    assert_eq!(r["tensors"]["0,3"]["(0,0),(0,0),(0,0)"], "1/4");
    assert_eq!(r["theorem_check"]["all_equal"], true);
}

#[test]
fn float_backend_runs() {
    let out = spectral(&[&spec("airy.json"), "--field", "float:53"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["spec"]["backend"], "complex-f64");
}
