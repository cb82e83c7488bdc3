use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equivar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn matrix_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

const SYMMETRIC: &str = "3\n2 1 0\n1 3 1\n0 1 4\n";
const JORDAN: &str = "2\n1 1\n0 1\n";

#[test]
fn eig_table_and_json() {
    let f = matrix_file(SYMMETRIC);
    let out = run(&["eig", path(&f)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("values:"));

    let out = run(&["eig", path(&f), "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let values: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let expected = [3.0 - 3f64.sqrt(), 3.0, 3.0 + 3f64.sqrt()];
    for (got, want) in values.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12);
    }
    let rows = v["V"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // Each row is a unit eigenvector: A v = λ v.
    let a = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
    for (row, lambda) in rows.iter().zip(&values) {
        let x: Vec<f64> = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((ax - lambda * x[i]).abs() < 1e-12);
        }
    }
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn eig_exit_codes() {
    let f = matrix_file(JORDAN);
    assert_eq!(code(&run(&["eig", path(&f)])), 3);
    let f = matrix_file("2\n1 2\n3\n");
    assert_eq!(code(&run(&["eig", path(&f)])), 2);
    let f = matrix_file("2\n1 nan\nnan 1\n");
    assert_eq!(code(&run(&["eig", path(&f)])), 2);
    assert_eq!(code(&run(&["eig", "/nonexistent/matrix.txt"])), 2);
    let f = matrix_file(SYMMETRIC);
    assert_eq!(code(&run(&["eig", path(&f), "--bogus"])), 2);
}

#[test]
fn check_verdicts() {
    let f = matrix_file(SYMMETRIC);
    let out = run(&["check", path(&f)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("symmetric: true"));

    let f = matrix_file(JORDAN);
    let out = run(&["check", path(&f)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("symmetric: false"));

    let f = matrix_file("1\n-3.5\n");
    assert_eq!(code(&run(&["check", path(&f)])), 0);

    let f = matrix_file("2\n1 1e-12\n0 1\n");
    assert_eq!(code(&run(&["check", path(&f)])), 0);
    assert_eq!(code(&run(&["check", path(&f), "--tol", "1e-14"])), 1);
}

#[test]
fn group_listing() {
    let f = matrix_file(SYMMETRIC);
    let out = run(&["group", path(&f)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for label in ["-++:", "+-+:", "++-:"] {
        assert!(text.contains(label), "{text}");
    }
    assert!(text.contains("order: 8"));

    let out = run(&["group", path(&f), "--full"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("+++:") && text.contains("---:"));
    assert!(text.contains("elements checked: 8"));
    assert!(text.contains("closure: ok"));

    assert_eq!(code(&run(&["group", path(&f), "--full", "--generators"])), 2);
}

#[test]
fn group_full_refuses_large_dimension() {
    let n = 13;
    let mut text = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| if i == j { format!("{}", i + 1) } else { "0".into() }).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let f = matrix_file(&text);
    assert_eq!(code(&run(&["group", path(&f), "--full"])), 3);
    assert_eq!(code(&run(&["group", path(&f)])), 0);
    let small = matrix_file(SYMMETRIC);
    assert_eq!(code(&run(&["group", path(&small), "--full", "--max-n", "2"])), 3);
}

const F: &str = "x1*x2*x3^2 + x1^2 - 3*x2^2 + x2*sin(x1) - x2^2*x3^2";

#[test]
fn stencil_worked_example_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = run(&[
        "stencil", "--f", F, "--n", "3", "--x", "1,1,1", "--h", "0.2,0.05,0.1", "--s1", "+++", "--s2", "-++",
        "--scales", "1,0.1", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("fitted order: 4.00"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scale,S,second_diff_1,second_diff_2,hquad"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(row.len(), 5);
    assert!((row[1] - 6.40e-5).abs() < 0.01 * 6.40e-5);
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert!((row[1] - 6.38e-9).abs() < 0.01 * 6.38e-9);
}

#[test]
fn stencil_negative_coordinates() {
    let out = run(&[
        "stencil", "--f", "exp(x1)*x2^2 + x1^4", "--n", "2", "--x", "-0.5,-1", "--h", "-0.1,0.2", "--s1", "++",
        "--s2", "-+",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn stencil_failures() {
    let out = run(&["stencil", "--f", F, "--n", "3", "--x", "1,1,1", "--h", "0.2,0.05,0.1", "--s1", "+++", "--s2", "+++"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("GammaPairDegenerate"));

    let out = run(&["stencil", "--f", "x1^3 - x1*x2", "--n", "2", "--x", "0.3,0.1", "--h", "0.1,0.1", "--s1", "++", "--s2", "-+"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("noise floor"));

    let mismatched = ["stencil", "--f", F, "--n", "3", "--x", "1,1", "--h", "0.2,0.05,0.1", "--s1", "+++", "--s2", "-++"];
    assert_eq!(code(&run(&mismatched)), 2);
    let short_pattern = ["stencil", "--f", F, "--n", "3", "--x", "1,1,1", "--h", "0.2,0.05,0.1", "--s1", "++", "--s2", "-++"];
    assert_eq!(code(&run(&short_pattern)), 2);
    let bad_expr = ["stencil", "--f", "x1 +", "--n", "1", "--x", "1", "--h", "0.1", "--s1", "+", "--s2", "-"];
    assert_eq!(code(&run(&bad_expr)), 2);
    let bad_scales = ["stencil", "--f", "x1^4", "--n", "1", "--x", "1", "--h", "0.1", "--s1", "+", "--s2", "-", "--scales", "0.1,1"];
    assert_eq!(code(&run(&bad_scales)), 2);
}

#[test]
fn demo_passes_and_is_deterministic() {
    let a = run(&["demo"]);
    let b = run(&["demo"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    assert!(text.contains("0.9225"));
}
