use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mdcp::cli::read_series;
use mdcp::{predict_next, Alpha, Method, PredictorConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn mdcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdcp"))
        .args(args)
        .output()
        .unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = mdcp(&[
            "simulate",
            "--model",
            "sine",
            "--n",
            "100",
            "--seed",
            "7",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(read_series(&a).unwrap().len(), 100);
}

#[test]
fn predict_row_matches_library_call() {
    let input = fixture("series100.csv");
    let o = mdcp(&[
        "predict",
        "--method",
        "mdcp",
        "--alpha",
        "0.1",
        "--input",
        input.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], "method,alpha,lower,upper");
    let fields: Vec<&str> = rows[1].split(',').collect();

    let series = read_series(&input).unwrap();
    let cfg = PredictorConfig::new(Method::Mdcp, Alpha::new(0.1).unwrap());
    let pi = predict_next(&series, &cfg, 42).unwrap().interval;
    assert_eq!(fields[0], "MDCP");
    assert_eq!(fields[2].parse::<f64>().unwrap(), pi.lower);
    assert_eq!(fields[3].parse::<f64>().unwrap(), pi.upper);
    assert!(text.contains("# seed=42\n") && text.contains("# G=200\n"));
}

#[test]
fn predict_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let input = fixture("series100.csv");
    let o = mdcp(&[
        "predict",
        "--method",
        "pmdcp",
        "--G",
        "50",
        "--input",
        input.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], "y,pvalue,accepted");
    assert_eq!(rows.len(), 51);
}

#[test]
fn evaluate_has_replication_rows_plus_summary() {
    let o = mdcp(&[
        "evaluate", "--method", "mdcp", "--R", "2", "--S", "50", "--n", "40", "--G", "40",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], "kind,replication,CVR,LEN,CVR Sd,LEN Sd");
    assert_eq!(
        rows.iter()
            .filter(|r| r.starts_with("replication,"))
            .count(),
        2
    );
    assert_eq!(rows.iter().filter(|r| r.starts_with("summary,")).count(), 1);
    assert_eq!(rows.len(), 4);
}

#[test]
fn bench_summary_and_steps() {
    let dir = tempfile::tempdir().unwrap();
    let steps = dir.path().join("steps.csv");
    let input = fixture("series100.csv");
    let o = mdcp(&[
        "bench",
        "--method",
        "mdcp",
        "--w",
        "80",
        "--input",
        input.to_str().unwrap(),
        "--bandwidth",
        "fixed:0.5,0.4",
        "--steps",
        steps.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows[0], "method,CVR,LEN,LEN Sd");
    assert_eq!(rows.len(), 2);
    let step_text = std::fs::read_to_string(&steps).unwrap();
    assert_eq!(data_rows(&step_text).len(), 1 + 20);
}

#[test]
fn errors_are_single_line_with_class_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0\nabc\n").unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "y\n").unwrap();

    let cases: [(Vec<&str>, i32, &str); 5] = [
        (
            vec!["simulate", "--alpha", "1.5"],
            2,
            "ERROR InvalidConfig:",
        ),
        (vec!["frobnicate"], 2, "ERROR InvalidConfig:"),
        (
            vec!["predict", "--input", bad.to_str().unwrap()],
            3,
            "ERROR ParseError:",
        ),
        (
            vec!["predict", "--input", empty.to_str().unwrap()],
            3,
            "ERROR EmptyFile:",
        ),
        (
            vec!["predict", "--input", "/nonexistent/series.csv"],
            5,
            "ERROR ",
        ),
    ];
    for (args, code, prefix) in cases {
        let o = mdcp(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.starts_with(prefix), "{args:?}: {err}");
        assert_eq!(err.lines().count(), 1);
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1.0\nabc\n").unwrap();
    let o = mdcp(&["predict", "--input", bad.to_str().unwrap()]);
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 2"));
}

#[test]
fn help_exits_zero() {
    assert!(mdcp(&["--help"]).status.success());
}
