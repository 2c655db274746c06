use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bspai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bspai")).args(args).output().expect("binary runs")
}

fn write_tridiagonal(path: &Path, n: usize) {
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n");
    let mut lines = Vec::new();
    for i in 1..=n {
        lines.push(format!("{i} {i} 4.0"));
        if i > 1 {
            lines.push(format!("{i} {} -1.5", i - 1));
        }
        if i < n {
            lines.push(format!("{i} {} -1.0", i + 1));
        }
    }
    text.push_str(&format!("{n} {n} {}\n", lines.len()));
    text.push_str(&lines.join("\n"));
    text.push('\n');
    fs::write(path, text).unwrap();
}

fn write_spec(dir: &Path) -> std::path::PathBuf {
    write_tridiagonal(&dir.join("tri.mtx"), 25);
    let spec = dir.join("spec.toml");
    fs::write(
        &spec,
        "precision = \"ddq\"\neps_b = [\"2^-53\", \"2^-37\"]\n\n[[matrix]]\nname = \"tri\"\npath = \"tri.mtx\"\nspai_eps = 0.2\n",
    )
    .unwrap();
    spec
}

#[test]
fn verify_bounds_passes() {
    let out = bspai(&["verify", "--bounds"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().count() >= 5);
    assert!(stdout.lines().all(|l| l.starts_with("[PASS]")), "{stdout}");
}

#[test]
fn verify_without_checks_is_an_error() {
    assert_eq!(bspai(&["verify"]).status.code(), Some(2));
}

#[test]
fn info_prints_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.mtx");
    write_tridiagonal(&path, 10);
    let out = bspai(&["info", path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("10 x 10"), "{stdout}");
    assert!(stdout.contains("nnz             28"), "{stdout}");

    let out = bspai(&["info", "--json", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["nnz"], 28);
    assert!(v["kappa_inf"].as_f64().unwrap() > 1.0);
}

#[test]
fn info_on_missing_file_fails() {
    let out = bspai(&["info", "/nonexistent/matrix.mtx"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path());
    for (fmt, check) in [
        ("md", "| Matrix |"),
        ("csv", "Matrix,Precond."),
        ("json", "\"preconditioner\": \"BSPAI(2^-37)\""),
    ] {
        let out_path = dir.path().join(format!("out.{fmt}"));
        let out = bspai(&[
            "run",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
            "--format",
            fmt,
            "--require-convergence",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let text = fs::read_to_string(&out_path).unwrap();
        assert!(text.contains(check), "{fmt}: {text}");
        assert!(text.contains("tri"));
    }
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path());
    let a = bspai(&["run", "--spec", spec.to_str().unwrap(), "--format", "csv"]);
    let b = bspai(&["run", "--spec", spec.to_str().unwrap(), "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_with_unreadable_matrix_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "precision = \"ssd\"\neps_b = [\"2^-24\"]\n[[matrix]]\nname = \"gone\"\npath = \"gone.mtx\"\nspai_eps = 0.1\n")
        .unwrap();
    let lenient = bspai(&["run", "--spec", spec.to_str().unwrap()]);
    assert!(lenient.status.success());
    let strict = bspai(&["run", "--spec", spec.to_str().unwrap(), "--require-convergence"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("gone"));
}

#[test]
fn bad_spec_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, "precision = \"xyz\"\n").unwrap();
    assert_eq!(bspai(&["run", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
}
