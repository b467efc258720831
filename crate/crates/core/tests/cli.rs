use std::path::Path;
use std::process::{Command, Output};

use ptspectra::output::split_csv;
use ptspectra::spectrum::SpectrumReport;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptspectra"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["error"], "missing_key");

    std::fs::write(dir.path().join("bad.conf"), "command = table1\ng = \"two\"\n").unwrap();
    let out = run(&["--config", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec = stderr_record(&out);
    assert_eq!(rec["error"], "type_mismatch");
    assert!(rec["message"].as_str().unwrap().contains("`g`"));

    std::fs::write(dir.path().join("syntax.conf"), "command = table1\n\nn1 400\n").unwrap();
    let out = run(&["--config", "syntax.conf"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_record(&out)["message"].as_str().unwrap().contains("line 3"));

    let out = run(&["spectrum", "--potential", "quartic"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--potential", "harmonic", "--k", "0.25", "--n1", "80", "--n2", "120"];
    let a = run(&[&args[..], &["-o", "a.csv"]].concat(), dir.path());
    let b = run(&[&args[..], &["-o", "b.csv"]].concat(), dir.path());
    assert!(a.status.success() && b.status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let (header, body) = split_csv(&text);
    assert!(header.contains(&"# sizes = 80, 120"));
    assert!(header.contains(&"# tol_abs = 1e-6"));
    let first = body.lines().nth(1).unwrap();
    assert!(first.starts_with("0,0.5"), "{first}");
    assert!(first.ends_with(",real,1e-6,1e-8,1e-6"), "{first}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "command = spectrum\npotential = shifted_ho\nn1 = 40\nn2 = 50  # overridden\nformat = json\n",
    )
    .unwrap();
    let out = run(&["--config", "run.conf", "--n2", "60"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["header"]["sizes"], "40, 60");
    let report: SpectrumReport = serde_json::from_value(doc["result"].clone()).unwrap();
    assert_eq!(report.sizes, (40, 60));
    let again = serde_json::to_value(&report).unwrap();
    assert_eq!(again, doc["result"]);
}

#[test]
fn strict_table_deviation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["table2", "--fast", "--strict", "-o", "t2.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_record(&out)["error"], "acceptance_deviation");
    let text = std::fs::read_to_string(dir.path().join("t2.csv")).unwrap();
    assert!(text.contains("paper table II, even-state column"));
    assert!(text.contains("interleaved_odd"));

    let out = run(&["table2", "--fast", "-o", "t2.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn scan_rows_and_brackets() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["scan-g", "--g-values", "2.2,2.5", "--n1", "200", "--n2", "300"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# merge_bracket = 2.2, 2.5"));
    assert!(text.contains("\n2.2,3,ok,"));
    assert!(text.contains("\n2.5,1,ok,"));
}
