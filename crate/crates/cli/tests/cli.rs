use std::io::Write;
use std::process::{Command, Output, Stdio};

fn kspm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kspm")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = kspm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn pi_examples() {
    let v = json(&["pi", "--d", "3", "--n", "24", "--format", "json"]);
    assert_eq!(v["diffs"], serde_json::json!([2, 1, 2, 1, 2]));
    let v = json(&["pi", "--d", "3", "--n", "0"]);
    assert_eq!(v["diffs"], serde_json::json!([]));
    let v = json(&["pi", "--d", "3", "--n", "97", "--verify-preconditions"]);
    assert_eq!(v["diffs"], serde_json::json!([2, 0, 2, 0, 2, 1, 2, 2, 1, 0, 2, 1]));
    let csv = stdout(&["pi", "--d", "3", "--n", "24", "--format", "csv"]);
    assert!(csv.starts_with("column,diff,height\n0,2,8\n"));
}

#[test]
fn avalanche_examples() {
    let v = json(&["avalanche", "--d", "3", "--k", "25"]);
    assert_eq!(v["fired"], serde_json::json!([0, 2, 1, 4, 3]));
    let v = json(&["avalanche", "--d", "3", "--k", "1"]);
    assert_eq!(v["fired"], serde_json::json!([]));
    let v = json(&["avalanche", "--d", "6", "--k", "1069", "--verify-preconditions"]);
    let peaks = v["peaks"].as_array().unwrap();
    assert!(peaks.contains(&16.into()) && peaks.contains(&21.into()));
    let panels = stdout(&["avalanche", "--d", "3", "--k", "25", "--format", "ascii"]);
    assert_eq!(panels.matches("fire column").count(), 5);
}

#[test]
fn trace_and_transduce() {
    assert_eq!(stdout(&["trace", "--d", "4", "--n", "500", "--i", "4"]), "0120120\n");
    assert!(!kspm(&["trace", "--d", "4", "--n", "500", "--i", "3"]).status.success());
    assert_eq!(
        stdout(&["trace", "--d", "4", "--n", "500", "--i", "3", "--verify-preconditions", "false"]),
        "0120120210\n"
    );
    assert_eq!(stdout(&["transduce", "--d", "3", "--word", "abaaaaab", "--iters", "1"]), "abaab\n");
    assert_eq!(stdout(&["transduce", "--d", "3", "--word", "ab", "--iters", "1"]), "");

    let mut child = Command::new(env!("CARGO_BIN_EXE_kspm"))
        .args(["transduce", "--d", "3", "--iters", "2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"abaaaaab\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "aba\n");

    let edges = stdout(&["transduce", "--d", "3", "--edges"]);
    assert_eq!(edges.lines().count(), 15);
    assert!(edges.contains("21,b,11,ab\n") && edges.contains("22,a,11,ba\n"));
}

#[test]
fn density_and_predict() {
    let v = json(&["density", "--d", "4", "--n", "500"]);
    assert_eq!(v["global_density_column"], 6);
    assert_eq!(json(&["density", "--d", "4", "--n", "195"])["long_avalanches"].as_array().unwrap().len(), 8);
    let v = json(&["predict", "--d", "3", "--n", "500"]);
    for p in v["intervals"].as_array().unwrap() {
        assert_ne!(p["agrees"], false);
    }
}

#[test]
fn raster_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for path in [&a, &b] {
        stdout(&["raster", "--d", "3", "--nmax", "100", "--out", path.to_str().unwrap()]);
    }
    let svg = std::fs::read_to_string(&a).unwrap();
    assert_eq!(svg, std::fs::read_to_string(&b).unwrap());
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    for id in ["fired", "peaks", "global-density", "max-column"] {
        assert!(svg.contains(&format!(r#"id="{id}""#)), "{id}");
    }
    let one = stdout(&["raster", "--d", "3", "--nmax", "1", "--format", "ascii"]);
    assert_eq!(one.lines().count(), 1);
}

#[test]
fn sweep_csv() {
    let out = kspm(&["sweep", "--d", "3", "--nmax", "200"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,onset,effective_length,ratio,log_bound"));
    assert_eq!(lines.count(), 200);
    assert!(String::from_utf8_lossy(&out.stderr).contains("density bound holds"));
}

#[test]
fn verify_quick_reports_by_name() {
    let out = kspm(&["verify", "--quick"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.contains("PASS fixed points"));
    assert!(text.contains("FAIL transducer diagram D=3"));
    assert!(!kspm(&["verify", "--quick", "--strict"]).status.success());
}

#[test]
fn usage_errors() {
    assert!(!kspm(&["pi", "--d", "1", "--n", "3"]).status.success());
    assert!(!kspm(&["pi", "--d", "3"]).status.success());
    assert!(!kspm(&["avalanche", "--d", "3", "--k", "0"]).status.success());
    let out = kspm(&["pi", "--n", "3", "--format", "svg"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--format svg"));
}

#[test]
fn identical_invocations_match() {
    for args in [
        &["pi", "--d", "4", "--n", "300", "--format", "ascii"][..],
        &["transduce", "--d", "4", "--edges", "--format", "svg"][..],
        &["density", "--d", "3", "--n", "300", "--format", "csv"][..],
    ] {
        assert_eq!(kspm(args).stdout, kspm(args).stdout);
    }
}
