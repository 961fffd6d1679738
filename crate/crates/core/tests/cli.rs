use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const CONFIG: &str = r#"
[problem]
kernel = "exp(t-x)"
f = "exp(2*t)-exp(t)"
interval = [0, 1]
exact = "exp(t)"

[nonlinearity]
kind = "polynomial"
alpha = [0, 0, 1]

[solver]
scan_range = [0, 2]
"#;

fn dov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dov")).args(args).output().unwrap()
}

fn config(basis: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    write!(f, "{CONFIG}\n[basis]\n{basis}\n").unwrap();
    f
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_writes_one_csv_row() {
    let cfg = config("n = 1\nm = 6");
    let o = dov(&["solve", cfg.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,M,L,E_inf,residual_linf,newton_iters,condition_estimate,wall_ms,status");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[..3], &["1", "6", "6"]);
    let e: f64 = fields[3].parse().unwrap();
    assert!(e < 1e-3, "{e}");
    assert_eq!(fields[8], "ok");
}

#[test]
fn sweep_keeps_order_and_writes_json() {
    let cfg = config("sweep = [[1, 6], [1, 4]]");
    let out = NamedTempFile::new().unwrap();
    let o = dov(&["sweep", cfg.path().to_str().unwrap(), "--format", "json", "--out", out.path().to_str().unwrap(), "--timing"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.path()).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["M"], 6);
    assert_eq!(rows[1]["M"], 4);
    assert!(rows[0]["wall_ms"].is_number());
}

#[test]
fn solve_refuses_a_sweep() {
    let cfg = config("sweep = [[1, 4], [1, 6]]");
    assert_eq!(dov(&["solve", cfg.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn config_errors_name_the_key() {
    let mut f = NamedTempFile::new().unwrap();
    write!(f, "[problem]\nkernel = \"1\"\nf = \"t+\"\ninterval = [0, 1]\n[nonlinearity]\nkind = \"polynomial\"\nalpha = [0, 1]\n[basis]\nm = 4\n").unwrap();
    let o = dov(&["solve", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("problem.f"), "{err}");
}

#[test]
fn examples_are_listed() {
    let o = dov(&["examples", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 10);
}

#[test]
fn run_example_check() {
    let ok = dov(&["run-example", "ex2", "--N", "1", "--M", "8", "--check"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stderr).unwrap().contains("ok"));

    let unknown = dov(&["run-example", "ex42"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn non_convergence_sets_exit_code() {
    let o = dov(&["run-example", "ex9", "--N", "2", "--M", "4"]);
    assert_eq!(o.status.code(), Some(2));
}
