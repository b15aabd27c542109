//! Browser bindings for cpdshift. Every export returns a JSON string;
//! failures come back as `{"error": "..."}`.

use cpdshift::cli::{similar_report, Opts};
use cpdshift::cpd::{classify_type, validate_triplet, ScalarTriplet, ShiftSequences};
use cpdshift::quasiaffine::similarity_test;
use cpdshift::verdict::Outcome;
use cpdshift::wab::{wab_classify, wab_weights};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_POINTS: u32 = 2000;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn series(seq: &ShiftSequences, n_max: u32) -> Result<Value, String> {
    let n_max = n_max.min(MAX_POINTS) as u64;
    let mut log_gamma = Vec::new();
    let mut lambda = Vec::new();
    let mut beta = Vec::new();
    for n in 0..=n_max {
        log_gamma.push(seq.log_gamma(n));
        lambda.push(seq.weight(n));
        beta.push(seq.beta(n).map_err(err)?);
    }
    Ok(json!({ "log_gamma": log_gamma, "lambda": lambda, "beta": beta }))
}

/// Sequences and verdicts for `(b, c, ν)`; `atoms` is a JSON array of
/// `[point, mass]` pairs.
#[wasm_bindgen]
pub fn sequences(b: f64, c: f64, atoms: &str, n_max: u32) -> String {
    respond((|| {
        let atoms: Vec<(f64, f64)> = serde_json::from_str(if atoms.trim().is_empty() { "[]" } else { atoms })
            .map_err(err)?;
        let t = ScalarTriplet::from_parts(b, c, &atoms).map_err(err)?;
        let validation = validate_triplet(&t);
        if validation.outcome != Outcome::Yes {
            return Ok(json!({ "validation": validation }));
        }
        let seq = ShiftSequences::new(t.clone()).map_err(err)?;
        let similar = similar_report(&t, &Opts::default()).map_err(err)?;
        Ok(json!({
            "validation": validation,
            "type": classify_type(&t).map_err(err)?,
            "classification": similar.classification,
            "citation": similar.citation,
            "series": series(&seq, n_max)?,
        }))
    })())
}

/// Classification and weights of `W_{a,b}`.
#[wasm_bindgen(js_name = wabExplore)]
pub fn wab_explore(a: f64, b: f64, n_max: u32) -> String {
    respond((|| {
        let class = wab_classify(a, b).map_err(err)?;
        let weights = (0..=n_max.min(MAX_POINTS) as u64)
            .map(|n| wab_weights(a, b, n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(json!({ "class": class, "weights": weights }))
    })())
}

/// `ln(ω̂_n/λ̂_n)` and the similarity verdict for two inputs, each a triplet
/// or a tagged moment source.
#[wasm_bindgen(js_name = compareRatio)]
pub fn compare_ratio(input_a: &str, input_b: &str, n_max: u32) -> String {
    respond((|| {
        let a = cpdshift::cli::parse_source(input_a).map_err(err)?;
        let b = cpdshift::cli::parse_source(input_b).map_err(err)?;
        let n = (n_max.min(MAX_POINTS) as u64).max(2);
        let la = a.log_moments(n).map_err(err)?;
        let lb = b.log_moments(n).map_err(err)?;
        let log_ratio: Vec<f64> = lb.iter().zip(&la).map(|(o, l)| o - l).collect();
        let verdict = similarity_test(&a, &b, n).map_err(err)?;
        Ok(json!({ "log_ratio": log_ratio, "similarity": verdict }))
    })())
}
