use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mapt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mapt")).args(args).output().unwrap()
}

#[test]
fn solve_prints_csv() {
    let input = fixture("fc3.uai");
    let out = mapt(&["solve", "--input", input.to_str().unwrap(), "--method", "fr1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "seconds,bound,triplets,stage,eps,dmax");
    assert_eq!(lines.len(), 3);
    let last: Vec<&str> = lines[2].split(',').collect();
    let bound: f64 = last[1].parse().unwrap();
    assert!(bound >= 1.0 - 1e-3);
    assert_eq!(last[2], "1");
}

#[test]
fn trace_file_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let input = fixture("fc3.native");
    let out = mapt(&[
        "solve",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "native",
        "--trace",
        trace.to_str().unwrap(),
        "--certify",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("verified"), "{stderr}");
    let csv = std::fs::read_to_string(trace).unwrap();
    assert!(csv.starts_with("seconds,bound,triplets,stage,eps,dmax\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.uai");
    std::fs::write(&bad, "MARKOV\n3\n2 2 2\n1\n3 0 1 2\n8\n1 1 1 1 1 1 1 1\n").unwrap();
    let out = mapt(&["solve", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("arity 3"));

    let missing = dir.path().join("missing.uai");
    let out = mapt(&["solve", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_two() {
    let input = fixture("fc3.uai");
    let out = mapt(&["solve", "--input", input.to_str().unwrap(), "--eps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps"));
}
