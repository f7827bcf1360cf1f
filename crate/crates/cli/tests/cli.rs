use std::fs;
use std::path::Path;

use sharptrans_cli::{dispatch, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String) {
    dispatch(std::iter::once("sharptrans").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}

#[test]
fn dickson_build_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("d9.txt");
    let (code, out) = run(&["build", "agl", "--q", "9", "--dickson", "-o", path(&g)]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "order"), Some("72"));

    let (code, out) = run(&["analyze", "--group", path(&g)]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "characteristic"), Some("3"));
    assert_eq!(field(&out, "split"), Some("true"));
    assert_eq!(field(&out, "regular_normal_order"), Some("9"));

    let (code, out) = run(&[
        "extract",
        "--group",
        path(&g),
        "-o",
        path(&dir.path().join("t.txt")),
    ]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "near_field"), Some("true"));
}

#[test]
fn neumann_witness_at_radius_one() {
    let (code, out) = run(&["freeprod", "neumann-witness", "--radius", "1"]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "witness"), Some("u = n1, v = n1^-1"));
    assert_eq!(field(&out, "tJ closed"), Some("false"));
}

#[test]
fn cyclic_group_is_not_two_transitive() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c3.txt");
    fs::write(&g, "degree: 3\ngen: 1 2 0\n").unwrap();
    let (code, out) = run(&["verify", "--group", path(&g), "--sharp", "2"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("not 2-transitive"), "{out}");

    let (code, out) = run(&["verify", "--group", path(&g), "--sharp", "1"]);
    assert_eq!(code, EXIT_PASS, "{out}");
}

#[test]
fn symmetric_group_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("s3.txt");
    let (code, _) = run(&["build", "catalog", "S(3)", "-o", path(&g)]);
    assert_eq!(code, EXIT_PASS);
    let first = fs::read_to_string(&g).unwrap();

    let (code, printed) = run(&["build", "catalog", "S(3)"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(printed, first);

    let (code, out) = run(&["verify", "--group", path(&g), "--sharp", "3"]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "order"), Some("6"));
}

#[test]
fn field_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("gf4.txt");
    let (code, _) = run(&["nearfield", "--q", "4", "-o", path(&t)]);
    assert_eq!(code, EXIT_PASS);
    let (code, printed) = run(&["nearfield", "--q", "4"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(printed, fs::read_to_string(&t).unwrap());

    let (code, out) = run(&["verify", "--table", path(&t)]);
    assert_eq!(code, EXIT_PASS, "{out}");
    let (code, out) = run(&["kerby", "--table", path(&t)]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "holds"), Some("true"));
}

#[test]
fn truncated_table_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("bad.txt");
    let (_, text) = run(&["nearfield", "--q", "4"]);
    let lines: Vec<&str> = text.lines().collect();
    fs::write(&t, lines[..lines.len() - 1].join("\n")).unwrap();
    let (code, out) = run(&["verify", "--table", path(&t)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.contains("line 13"), "{out}");
    assert!(out.contains("mul table is missing row 3"), "{out}");
}

#[test]
fn malformed_group_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("bad.txt");
    fs::write(&g, "degree: 3\n\ngen: 0 0 1\n").unwrap();
    let (code, out) = run(&["analyze", "--group", path(&g)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.contains("line 3"), "{out}");
}

#[test]
fn non_sharp_group_fails_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("s4.txt");
    run(&["build", "catalog", "S(4)", "-o", path(&g)]);
    let (code, _) = run(&["analyze", "--group", path(&g)]);
    assert_eq!(code, EXIT_FAIL);
}

#[test]
fn word_commands() {
    let (code, out) = run(&["freeprod", "normal-form", "t t c1 n1 n1^-1"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(out.lines().next(), Some("c1"));

    assert_eq!(run(&["freeprod", "involution", "n1^-1 t n1"]).0, EXIT_PASS);
    assert_eq!(run(&["freeprod", "involution", "n1"]).0, EXIT_FAIL);
    assert_eq!(run(&["freeprod", "conjugate", "t n1", "n1 t"]).0, EXIT_PASS);
    assert_eq!(
        run(&["freeprod", "conjugate", "t n1^-1 t n1", "t n1^-2 t n1^2"]).0,
        EXIT_FAIL
    );
    assert_eq!(run(&["freeprod", "in-tj", "t n1^-1 t n1"]).0, EXIT_PASS);
    assert_eq!(run(&["freeprod", "normal-form", "x7"]).0, EXIT_USAGE);
}

#[test]
fn construction_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("stage.txt");
    let args = [
        "construct",
        "--steps",
        "10",
        "--depth",
        "3",
        "--seed",
        "7",
        "--snapshot",
        path(&snap),
    ];
    let (code, first) = run(&args);
    assert_eq!(code, EXIT_PASS, "{first}");
    assert_eq!(field(&first, "points"), Some("24"));
    assert_eq!(field(&first, "violations"), Some("0"));
    let snap_text = fs::read_to_string(&snap).unwrap();
    let (_, second) = run(&args);
    assert_eq!(first, second);
    assert_eq!(snap_text, fs::read_to_string(&snap).unwrap());
}

#[test]
fn pgl_group_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("pgl4.txt");
    let (code, out) = run(&["pgl", "--q", "4", "--emit-group", path(&g)]);
    assert_eq!(code, EXIT_PASS, "{out}");
    assert_eq!(field(&out, "order"), Some("60"));
    let (code, out) = run(&["verify", "--group", path(&g), "--sharp", "3"]);
    assert_eq!(code, EXIT_PASS, "{out}");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(run(&["build", "agl"]).0, EXIT_USAGE);
    assert_eq!(run(&["nearfield", "--q", "6"]).0, EXIT_USAGE);
    assert_eq!(
        run(&["verify", "--group", "/nonexistent/file"]).0,
        EXIT_USAGE
    );
    let (code, help) = run(&["--help"]);
    assert_eq!(code, EXIT_PASS);
    assert!(help.contains("SHARP_MAX_ORDER"));
}
