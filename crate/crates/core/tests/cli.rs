use std::process::Command;

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cymoduli")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn passing_report_exits_zero() {
    let (code, out, err) = bin(&["yukawa", "--model", "models/quintic.toml"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("command = yukawa\n") && out.ends_with("status = pass\n"));
    assert!(err.is_empty());
}

#[test]
fn failing_check_exits_one() {
    let (code, out, _) = bin(&["dj-check", "--model", "models/torus.toml"]);
    assert_eq!(code, 1);
    assert!(out.contains("literal = fail") && out.contains("corrected = pass"));
}

#[test]
fn input_errors_exit_two_with_location() {
    let (code, out, err) = bin(&["periods", "--model", "tests/fixtures/bad_model.toml"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(err, "error: tests/fixtures/bad_model.toml:7:9: expected a rational \"p/q\", got \"5/0\"\n");
    let (code, _, err) = bin(&["instantons", "--model", "models/torus.toml"]);
    assert_eq!(code, 2);
    assert!(err.contains("needs a Picard-Fuchs model"));
    let (code, _, _) = bin(&["periods"]);
    assert_eq!(code, 2);
    let (code, _, _) = bin(&["wp-curvature", "--model", "models/quintic.toml", "--step", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = bin(&["--help"]);
    assert_eq!(code, 0);
    for cmd in ["mirror-map", "z0-check", "abelian-map"] {
        assert!(out.contains(cmd), "{cmd}");
    }
}
