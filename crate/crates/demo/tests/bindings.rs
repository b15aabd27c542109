use cpdshift_demo::{compare_ratio, sequences, wab_explore};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn sequences_for_a_single_atom() {
    let v = parse(sequences(0.0, 0.0, "[[4, 1]]", 10));
    assert_eq!(v["classification"], "Similar");
    assert_eq!(v["series"]["beta"].as_array().unwrap().len(), 11);
    assert_eq!(v["series"]["beta"][1], 4.0);
}

#[test]
fn sequences_reports_bad_input() {
    assert!(parse(sequences(0.0, -1.0, "[]", 10))["error"].is_string());
    assert!(parse(sequences(0.0, 0.0, "not json", 10))["error"].is_string());
    let v = parse(sequences(-1.0, 0.0, "", 10));
    assert_eq!(v["validation"]["outcome"], "no");
}

#[test]
fn wab_weights_and_class() {
    let v = parse(wab_explore(0.5, 1.0, 5));
    assert_eq!(v["class"]["subnormal"], true);
    assert_eq!(v["weights"].as_array().unwrap().len(), 6);
    assert!(parse(wab_explore(3.0, 0.5, 5))["error"].is_string());
}

#[test]
fn ratio_of_two_isometry_to_shift() {
    let v = parse(compare_ratio(r#"{"b":1,"c":0}"#, r#"{"b":0,"c":0}"#, 64));
    assert_eq!(v["similarity"]["outcome"], "no");
    let r = v["log_ratio"].as_array().unwrap();
    assert!((r[64].as_f64().unwrap() + 65f64.ln()).abs() < 1e-12);
}
