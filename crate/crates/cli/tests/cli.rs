use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qcomp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcomp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn qcomp")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report on stdout")
}

fn csv_body(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn corrsample_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["corrsample", "--N", "2", "--K", "32", "--trials", "10000", "--seed", "7"];
    let out = qcomp(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json_of(&out);
    for f in ["bound", "exact_agreement", "empirical_agreement"] {
        assert!(r[f].is_f64(), "missing {f}");
    }
    let exact = r["exact_agreement"].as_f64().unwrap();
    let emp = r["empirical_agreement"].as_f64().unwrap();
    let sigma = r["sigma"].as_f64().unwrap();
    assert!((exact - emp).abs() <= 4.0 * sigma + 1e-12);
    assert!(r["input_hash"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(r["config"]["K"], 32);
    assert_eq!(out.stdout, qcomp(&args, dir.path()).stdout);
}

#[test]
fn compress_csv_columns_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcomp(
        &["compress", "--eps", "0.45", "--fixture", "qubit_pair.json", "--trials", "200"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = csv_body(&out);
    assert_eq!(body[0], "trial,m,n,agreed,bits,fidelity");
    assert_eq!(body.len(), 1 + 200 + 1);
    assert!(body.last().unwrap().starts_with("summary,"));
    let bits: Vec<&str> = body[1..201].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    assert!(bits.iter().all(|b| *b == bits[0]));
    let header = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(header.contains("# derivations {"), "parameter derivations embedded");
    for key in ["\"delta\"", "\"c_prime\"", "\"blocks\"", "\"total_indices\"", "\"hash_count\""] {
        assert!(header.contains(key), "{key}");
    }
}

#[test]
fn transcript_is_one_json_object_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcomp(
        &[
            "compress",
            "--fixture",
            "qubit_pair.json",
            "--trials",
            "25",
            "--transcript",
            "t.jsonl",
            "--dump-states",
            "--out",
            "r.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 25);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["trial"], i);
        assert!(l["state"].is_array());
        assert!(l["bits_sent"].is_u64());
    }
}

#[test]
fn selfcheck_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = qcomp(&["selfcheck", "--seed", "1", "--out", "a.json"], dir.path());
    let b = qcomp(&["selfcheck", "--seed", "1", "--out", "b.json"], dir.path());
    assert!(a.status.success() && b.status.success());
    let ra = std::fs::read(dir.path().join("a.json")).unwrap();
    let rb = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(ra, rb);
    let r: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(r["all_hold"], true);
    assert_eq!(r["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn thread_count_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["compress", "--N", "3", "--K", "16", "--trials", "300", "--format", "json"];
    let one = Command::new(env!("CARGO_BIN_EXE_qcomp"))
        .args(args)
        .env("QC_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_qcomp"))
        .args(args)
        .env("QC_THREADS", "4")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qcomp(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(qcomp(&["compress", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(qcomp(&["compress", "--trials", "many"], dir.path()).status.code(), Some(2));
    assert_eq!(qcomp(&["oneway", "--builtin", "nope"], dir.path()).status.code(), Some(2));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_qcomp"))
        .args(["quantities"])
        .env("QC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn module_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let eps = qcomp(&["compress", "--eps", "1.5"], dir.path());
    assert_eq!(eps.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&eps.stderr).contains("epsilon"));
    assert_eq!(qcomp(&["substate", "--fixture", "missing.json"], dir.path()).status.code(), Some(3));
    // N·K above the dense slot cap
    assert_eq!(qcomp(&["corrsample", "--N", "4", "--K", "64"], dir.path()).status.code(), Some(3));
}

#[test]
fn violation_exits_1_and_writes_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcomp(
        &["selfcheck", "--seed", "2", "--trials", "3", "--margin", "1e6", "--out", "nested/r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&std::fs::read(dir.path().join("nested/r.json")).unwrap()).unwrap();
    assert_eq!(report["all_hold"], false);
    let names = report["counterexamples"].as_array().unwrap();
    assert_eq!(names.len(), 12);
    let first = dir.path().join("nested").join(names[0].as_str().unwrap());
    let cx: Value = serde_json::from_slice(&std::fs::read(first).unwrap()).unwrap();
    assert_eq!(cx["seed"], 2);
    assert!(cx["states"]["rho"].is_array());
    assert!(cx["layouts"]["rho"].is_object());
    // nothing but the report and the fixtures in the output directory
    let files = std::fs::read_dir(dir.path().join("nested")).unwrap().count();
    assert_eq!(files, 13);
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 6] = [
        &["quantities", "--fixture", "commuting_pair.json"],
        &["substate", "--N", "4", "--eps", "0.2"],
        &["sideinfo", "--trials", "50"],
        &["oneway", "--builtin", "index", "--trials", "500"],
        &["sweep", "--fixture", "dyadic_pair.json", "--format", "json"],
        &["compress", "--channel", "depolarizing:0.2", "--trials", "50", "--format", "json"],
    ];
    for args in runs {
        let out = qcomp(args, dir.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let r = json_of(&out);
        assert_eq!(r["command"], args[0]);
        assert!(r["rows"].as_array().is_some_and(|rows| !rows.is_empty()));
    }
}

#[test]
fn sweep_defaults_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcomp(&["sweep", "--fixture", "qubit_pair.json", "--over", "eps", "--values", "0.3,0.6"], dir.path());
    assert!(out.status.success());
    let body = csv_body(&out);
    assert!(body[0].starts_with("K,eps,delta,c_prime"));
    assert_eq!(body.len(), 3);
}
