use std::path::Path;
use std::process::Command;

fn slocc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_slocc"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const JORDAN_STATE: &str = r#"{"L": 3, "N": 2, "entries": [
  [["1", "0"], ["0", "1"]],
  [["1", "1"], ["0", "1"]],
  [["2", "3"], ["0", "2"]]]}"#;

#[test]
fn canonicalize_a_jordan_state() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "s.json", JORDAN_STATE);
    let (code, out, err) = slocc(&["canonicalize", &f]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["blocks"][0]["lambda"], "1");
    assert_eq!(v["blocks"][0]["coeffs"], serde_json::json!(["2", "3"]));
    assert!(err.contains("commute: true"));

    // the output is itself a canonical file, and a fixed point
    let g = write(dir.path(), "c.json", &out);
    let (code, again, _) = slocc(&["symmetry-map", &g]);
    assert_eq!(code, 0);
    assert_eq!(again, out);
}

#[test]
fn product_state_lives_on_its_support() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "p.json",
        r#"{"L": 2, "N": 2, "entries": [[["1", "0"], ["0", "0"]], [["2", "0"], ["0", "0"]]]}"#,
    );
    let (code, out, err) = slocc(&["canonicalize", &f]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 1);
    assert_eq!(v["blocks"][0]["size"], 1);
    assert!(err.contains("support 1 of 2"));
}

#[test]
fn bad_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "z.json",
        r#"{"L": 1, "N": 1, "entries": [[["1/0"]]]}"#,
    );
    assert_eq!(slocc(&["canonicalize", &f]).0, 3);
    let g = write(
        dir.path(),
        "w.json",
        r#"{"L": 1, "N": 2, "entries": [[["1"]]]}"#,
    );
    assert_eq!(slocc(&["canonicalize", &g]).0, 3);
    assert_eq!(slocc(&["canonicalize", "/nonexistent/file.json"]).0, 3);
}

#[test]
fn symmetry_map_and_poles() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "c.json",
        r#"{"n": 3, "blocks": [{"lambda": "1", "size": 3, "coeffs": ["0", "2", "3"]}]}"#,
    );
    let (code, out, _) = slocc(&["symmetry-map", &f, "--z3", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["blocks"][0]["lambda"], "1");
    assert_eq!(
        v["blocks"][0]["coeffs"],
        serde_json::json!(["0", "2/3", "1/9"])
    );
    let (code, _, err) = slocc(&["symmetry-map", &f, "--z1", "-1"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn equiv_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.json",
        r#"{"n": 3, "blocks": [{"lambda": "1", "size": 3, "coeffs": ["0", "2", "3"]}]}"#,
    );
    let b = write(
        dir.path(),
        "b.json",
        r#"{"n": 3, "blocks": [{"lambda": "1", "size": 3, "coeffs": ["0", "2/3", "1/9"]}]}"#,
    );
    let c = write(
        dir.path(),
        "c.json",
        r#"{"n": 3, "blocks": [{"lambda": "0", "size": 2, "coeffs": ["0", "1"]}, {"lambda": "1", "size": 1, "coeffs": ["1"]}]}"#,
    );
    let (code, out, _) = slocc(&["equiv", &a, &b]);
    assert_eq!(code, 0);
    assert!(out.starts_with("Equivalent"));
    let (code, out, _) = slocc(&["equiv", &a, &c]);
    assert_eq!(code, 1);
    assert!(out.contains("under the generated group"));
}

#[test]
fn selftest_mobius_profile() {
    let (code, out, _) = slocc(&["selftest", "--profile", "2nn", "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = slocc(&["selftest", "--profile", "golden", "--json"]);
    assert_eq!(code, 0);
    assert!(out
        .lines()
        .all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
}
