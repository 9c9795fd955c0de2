use std::process::{Command, Output};

use serde_json::Value;

fn hplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hplab"))
        .args(args)
        .env_remove("HPLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = hplab(&all);
    assert!(
        o.status.success(),
        "{:?}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !k.contains("millis"));
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn info_reports_both_criteria() {
    let v = json(&["info", "--group", "cyclic:6"]);
    assert_eq!(v["product_condition"], false);
    assert_eq!(v["sylow_condition"], false);
    assert_eq!(v["hall_paige"], false);
    let text = stdout(&hplab(&["info", "--group", "cyclic:6"]));
    assert!(text.contains("hall_paige=false"));
}

#[test]
fn info_reads_cayley_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q8.cayley");
    let q8 = json(&["info", "--group", "quaternion"]);
    assert_eq!(q8["abelianization_order"], 4);
    // dump the table through the library format and read it back
    let table = hplab::GroupSpec::Quaternion
        .build()
        .unwrap()
        .to_cayley_text();
    std::fs::write(&path, table).unwrap();
    let source = format!("file:{}", path.display());
    let v = json(&["info", "--group", &source]);
    assert_eq!(v["abelianization_order"], 4);
    assert_eq!(v["group"], "q8");
    assert_eq!(v["hall_paige"], true);
}

#[test]
fn bad_input_exits_with_two() {
    for args in [
        &["info", "--group", "cyclic:0"][..],
        &["info", "--group", "klein_bottle:4"],
        &["info", "--group", "file:/nonexistent/table"],
        &["count", "--group", "cyclic:15"],
        &["predict", "--group", "cyclic:5", "--order", "9"],
        &["verify", "--suite", "nonsense"],
        &["frobnicate"],
    ] {
        let o = hplab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_hplab"))
        .args(["info", "--group", "cyclic:3"])
        .env("HPLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn counts() {
    assert_eq!(
        json(&["count", "--group", "cyclic:5"])["complete_mappings"],
        "15"
    );
    assert_eq!(
        json(&["count", "--group", "cyclic:4"])["complete_mappings"],
        "0"
    );
    assert_eq!(
        json(&["count", "--group", "cyclic:7"])["complete_mappings"],
        "133"
    );

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.txt");
    std::fs::write(&f, "0 0 0\n").unwrap();
    let v = json(&["count", "--group", "cyclic:3", "--f", f.to_str().unwrap()]);
    // f = 1 gives n! cm(G) = 6 * 3
    assert_eq!(v["triple"]["count"], "18");
    std::fs::write(&f, "1 0 0\n").unwrap();
    let v = json(&["count", "--group", "cyclic:3", "--f", f.to_str().unwrap()]);
    assert_eq!(v["triple"]["count"], "0");
    assert_eq!(v["triple"]["product_condition"], false);
}

#[test]
fn predict_reports_residuals_and_closed_form() {
    let v = json(&["predict", "--group", "cyclic:11", "--order", "1"]);
    assert_eq!(v["exact_count"], "37851");
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    assert!(stages.iter().all(|s| s["residual"].is_number()));

    let v = json(&[
        "predict",
        "--group",
        "elementary_abelian:2,3",
        "--order",
        "1",
    ]);
    assert_eq!(v["involution_fraction"], "1/1");
    let closed = v["closed_first_order"].as_f64().unwrap();
    let want = (-0.5f64).exp() * (1.0 + 7.0 / 12.0 / 8.0);
    assert!((closed - want).abs() < 1e-12);

    let big = json(&["predict", "--group", "symmetric:4", "--order", "0"]);
    assert!(big["exact_count"].is_null());
    assert!(big["stages"][0]["residual"].is_null());
}

#[test]
fn verify_suites() {
    let o = hplab(&["verify", "--suite", "tables"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("connected-class ").count(), 19);
    assert!(text.ends_with("32 checks, 0 failed\n"));

    let v = json(&["verify", "--suite", "routes", "--max-n", "5"]);
    let checks = v.as_array().unwrap();
    assert!(checks.len() >= 4);
    assert!(checks
        .iter()
        .all(|c| c["passed"] == true && c["suite"] == "routes"));

    let o = hplab(&["verify", "--suite", "hp-equivalence", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("suite,name,params,passed,detail\n"));
}

#[test]
fn corpus_rows_and_determinism() {
    let o = hplab(&["corpus", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), hplab::verify::CORPUS.len());
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for r in &rows {
        if &r[col("hall_paige")] == "false" && !r[col("exact_count")].is_empty() {
            assert_eq!(&r[col("exact_count")], "0", "{}", &r[col("group")]);
        }
    }
    let eight: Vec<_> = rows.iter().filter(|r| &r[col("n")] == "8").collect();
    assert!(eight.iter().any(|r| &r[col("max_in_order")] == "true"));

    let mut a = json(&["corpus", "--max-n", "7", "--order", "0"]);
    let mut b = json(&["corpus", "--max-n", "7", "--order", "0"]);
    strip_timing(&mut a);
    strip_timing(&mut b);
    assert_eq!(a, b);
    assert_eq!(a.as_array().unwrap().len(), 10);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("info.json");
    let o = hplab(&[
        "info",
        "--group",
        "symmetric:3",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["abelianization_order"], 2);
}
