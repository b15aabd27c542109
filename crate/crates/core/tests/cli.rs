use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn cpdshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpdshift")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn examples_round_trip_through_classify() {
    let cases: [&[&str]; 4] = [
        &["examples", "wab", "--a", "0.5", "--b", "2"],
        &["examples", "first", "--b", "1", "--c", "0.5", "--atoms", "3"],
        &["examples", "second", "--t", "0.25"],
        &["examples", "third", "--positive-c"],
    ];
    for args in cases {
        let out = cpdshift(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let input = String::from_utf8(out.stdout).unwrap();
        let classified = cpdshift(&["classify", input.trim()]);
        assert_eq!(classified.status.code(), Some(0), "{args:?}");
        let v = json(&classified);
        assert_eq!(v["outcome"], "yes");
        assert_eq!(v["triplet"], serde_json::from_str::<Value>(&input).unwrap());
    }
}

#[test]
fn similar_reports_citation() {
    let out = cpdshift(&["similar", r#"{"b":0,"c":0,"nu":{"atoms":[[3,1]]}}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["classification"], "Similar");
    assert_eq!(v["citation"], "endpoint-atom");

    let out = cpdshift(&["similar", r#"{"b":1,"c":0,"nu":{"atoms":[[0.5,0.25]]}}"#]);
    assert_eq!(json(&out)["classification"], "NotSimilar");
}

#[test]
fn subnormal_with_berger_measure() {
    let out = cpdshift(&["subnormal", r#"{"b":-0.2,"c":0,"nu":{"atoms":[[0.5,0.1]]}}"#]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["outcome"], "yes");
    assert_eq!(v["hankel"]["outcome"], "yes");
    assert_eq!(v["berger"]["atoms"][1][0], 1.0);
}

#[test]
fn near_miss_is_inconclusive() {
    let out = cpdshift(&["subnormal", r#"{"b":-0.1999999,"c":0,"nu":{"atoms":[[0.5,0.1]]}}"#]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(cpdshift(&["classify", r#"{"b":0,"c":0,"nu":{"atoms":[[1,1]]}}"#]).status.code(), Some(1));
    assert_eq!(cpdshift(&["classify", "/no/such/file.json"]).status.code(), Some(1));
    assert_eq!(cpdshift(&["examples", "wab", "--a", "3", "--b", "1"]).status.code(), Some(1));
}

#[test]
fn spec_from_file_and_batch() {
    let dir = std::env::temp_dir().join(format!("cpdshift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let single = dir.join("t.json");
    std::fs::write(&single, r#"{"b":1,"c":0}"#).unwrap();
    let out = cpdshift(&["classify", single.to_str().unwrap()]);
    assert_eq!(json(&out)["type"]["kind"], "I");

    let batch = dir.join("b.jsonl");
    let mut f = std::fs::File::create(&batch).unwrap();
    writeln!(f, r#"{{"b":1,"c":0}}"#).unwrap();
    writeln!(f, r#"{{"b":0,"c":1}}"#).unwrap();
    writeln!(f, r#"{{"b":0,"c":0,"nu":{{"atoms":[[2,1]]}}}}"#).unwrap();
    drop(f);
    let out = cpdshift(&["classify", "--batch", batch.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let kinds: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["type"]["kind"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["I", "III", "III"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn series_switches_to_log_gamma() {
    let out = cpdshift(&["series", "--n-max", "600", r#"{"b":0,"c":0,"nu":{"atoms":[[4,1]]}}"#]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,log_gamma,lambda,beta"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 600.0);
    assert!((last[2] - 2.0).abs() < 1e-9);
    assert!((last[3] - 9.0).abs() < 1e-9);
}

#[test]
fn compare_weights_against_triplet() {
    let ones = format!("{{\"weights\":{:?}}}", vec![1.0; 600]);
    let out = cpdshift(&["compare", &ones, r#"{"b":0,"c":0}"#]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["classification"], "Similar");
}
