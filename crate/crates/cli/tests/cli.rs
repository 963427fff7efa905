use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinor-minimal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> Value {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let o = run(&a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn is_complex(v: &Value) -> bool {
    v.as_array().is_some_and(|a| a.len() == 2 && a.iter().all(Value::is_number))
}

#[test]
fn torus_table() {
    let o = run(&["arf", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("(℘−e3)du"));
    assert!(text.contains("[ok]"));
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["verify", "bogus"][..],
        &["sphere6"],
        &["sphere6", "1", "2", "x"],
        &["torus4", "1", "2"],
        &["omega", "plane:1"],
        &["arf", "1", "0"],
        &["--grid", "0", "sphere4"],
        &["--no-such-flag"],
        &["mesh", "cube", "/tmp/never.obj"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SPINOR_MINIMAL_THREADS"));
}

#[test]
fn report_schema_and_complex_pairs() {
    let v = json(&["omega", "sphere:0,1,inf"]);
    assert_eq!(v["schema"], "spinor-minimal/report/v1");
    assert_eq!(v["command"], "omega");
    assert_eq!(v["ok"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
    }
    let row = v["data"]["omega"][0].as_array().unwrap();
    assert_eq!(row.len(), 3);
    assert!(row.iter().all(is_complex));
}

#[test]
fn seeded_scans_are_deterministic() {
    let a = run(&["--json", "--seed", "7", "sphere6", "--scan", "3"]);
    let b = run(&["--json", "--seed", "7", "sphere6", "--scan", "3"]);
    let c = run(&["--json", "--seed", "8", "sphere6", "--scan", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn negative_complex_after_double_dash() {
    let v = json(&["torus4", "--", "1", "-0.3+1.1i"]);
    assert_eq!(v["ok"], true);
}

#[test]
fn out_dir_receives_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "verify", "pfaffian"]);
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("verify-pfaffian.json")).unwrap();
    let v: Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["schema"], "spinor-minimal/report/v1");
    assert_eq!(v["ok"], true);
}

fn obj_counts(path: &Path) -> (usize, usize) {
    let text = std::fs::read_to_string(path).unwrap();
    let v = text.lines().filter(|l| l.starts_with("v ")).count();
    let f = text.lines().filter(|l| l.starts_with("f ")).count();
    (v, f)
}

#[test]
fn sphere4_writes_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("s4.obj");
    let o = run(&["--grid", "12", "--mesh", obj.to_str().unwrap(), "sphere4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (v, f) = obj_counts(&obj);
    assert!(v > 0 && f > 0);
    assert!(obj.with_extension("meta.json").exists());
    assert!(stdout(&o).contains("cell closure"));
}

#[test]
fn mesh_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.obj"), dir.path().join("b.obj"));
    let o = run(&["--grid", "10", "mesh", "enneper", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_spinor-minimal"))
        .args(["--grid", "10", "--sequential", "mesh", "enneper", b.to_str().unwrap()])
        .env("SPINOR_MINIMAL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn torus_mesh_closes() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("t.obj");
    let v = json(&["--grid", "8", "mesh", "torus4", obj.to_str().unwrap()]);
    assert_eq!(v["ok"], true);
    assert!(obj_counts(&obj).1 > 0);
}

#[test]
fn verify_elliptic() {
    let v = json(&["verify", "elliptic"]);
    assert_eq!(v["ok"], true);
    assert!(v["checks"].as_array().unwrap().len() > 3);
}
