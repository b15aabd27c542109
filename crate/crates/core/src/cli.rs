//! The `cpdshift` command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cpd::{type_of, validate_triplet, ScalarTriplet, ShiftSequences, ShiftType};
use crate::error::{Error, Result};
use crate::quasiaffine::{intertwiner_check, quasi_affine_test, similarity_test, MomentSource};
use crate::similarity::{
    b2_identity_check, criterion_endpoint_atom, criterion_endpoint_mass, criterion_inequalities,
    criterion_weight_band, model_subnormal, similar_by_beta, EpsilonRule, IneqParams, BAND_END,
    BAND_START,
};
use crate::subnormality::{
    dichotomy_check, hankel_psd_oracle, is_subnormal, necessary_conditions, DEFAULT_NECESSARY_DEPTH,
};
use crate::verdict::{Citation, Outcome, Verdict};
use crate::wab::{generate_example, wab_classify, ExampleCase};

#[derive(Debug, Parser)]
#[command(name = "cpdshift", version, about = "CPD weighted shifts: classification, subnormality, similarity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Sequence depth (default depends on the command)
    #[arg(long, global = true)]
    pub n_max: Option<u64>,
    /// Relative tolerance of the Hankel oracle
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Hankel matrix order
    #[arg(long, global = true, default_value_t = 8)]
    pub hankel_order: usize,
    /// JSON output (default for reports)
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output (series only)
    #[arg(long, global = true)]
    pub csv: bool,
    /// Run the command on every line of a JSON-lines file of inputs
    #[arg(long, global = true, value_name = "FILE")]
    pub batch: Option<String>,
}

impl Default for Opts {
    fn default() -> Self {
        Self {
            n_max: None,
            tol: crate::subnormality::DEFAULT_HANKEL_TOL,
            hankel_order: crate::subnormality::DEFAULT_HANKEL_ORDER,
            json: false,
            csv: false,
            batch: None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a triplet, report its type and a summary of beta
    Classify { input: Option<String> },
    /// Decide subnormality and cross-check with the Hankel oracle
    Subnormal { input: Option<String> },
    /// Run every similarity criterion and aggregate
    Similar { input: Option<String> },
    /// Model subnormal shift and the defect identity
    Model { input: Option<String> },
    /// Moment-ratio tests between two shifts
    Compare { a: String, b: String },
    /// gamma, lambda and beta for n = 0..n_max
    Series { input: Option<String> },
    /// Emit example triplets
    Examples {
        #[command(subcommand)]
        which: ExampleCmd,
        /// Print the full report instead of the bare triplet
        #[arg(long)]
        report: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExampleCmd {
    /// The W_{a,b} family
    Wab {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// First inequality family
    First {
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        atoms: usize,
    },
    /// Second inequality family
    Second {
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long, default_value_t = 0.3)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        atoms: usize,
    },
    /// Third inequality family
    Third {
        #[arg(long, default_value_t = 0.8)]
        tau: f64,
        #[arg(long, default_value_t = 1.4)]
        t: f64,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        positive_c: bool,
        #[arg(long, default_value_t = 1)]
        atoms: usize,
    },
}

/// A finished command: text for stdout and whether the outcome was decided.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub decided: bool,
}

impl Report {
    fn json(value: &Value, decided: bool) -> Self {
        Self {
            body: serde_json::to_string_pretty(value).expect("reports serialize"),
            decided,
        }
    }
}

/// An input is a path to a JSON file or the JSON text itself.
pub fn read_input(input: &str) -> Result<String> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(input.to_string());
    }
    Ok(std::fs::read_to_string(Path::new(input))?)
}

pub fn parse_triplet(input: &str) -> Result<ScalarTriplet> {
    Ok(serde_json::from_str(&read_input(input)?)?)
}

/// A moment source, or a bare triplet.
pub fn parse_source(input: &str) -> Result<MomentSource> {
    let text = read_input(input)?;
    match serde_json::from_str::<MomentSource>(&text) {
        Ok(s) => Ok(s),
        Err(e) => serde_json::from_str::<ScalarTriplet>(&text)
            .map(MomentSource::Triplet)
            .map_err(|_| Error::Json(e)),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report parts serialize")
}

pub fn cmd_classify(t: &ScalarTriplet, opts: &Opts) -> Result<Report> {
    let validation = validate_triplet(t);
    let mut out = json!({
        "command": "classify",
        "triplet": t,
        "outcome": validation.outcome,
        "citation": validation.citation,
        "validation": validation,
    });
    if validation.outcome != Outcome::Yes {
        return Ok(Report::json(&out, validation.outcome == Outcome::No));
    }
    let seq = ShiftSequences::new(t.clone())?;
    let label = type_of(t);
    let n_max = opts.n_max.unwrap_or(64);
    let betas = (0..=n_max).map(|n| seq.beta(n)).collect::<Result<Vec<_>>>()?;
    let min = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let max = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    out["type"] = to_value(&label);
    out["citation"] = to_value(&Citation::TypeClassification);
    out["beta"] = json!({
        "beta_0": betas[0],
        "beta_1": betas.get(1),
        "min": min,
        "max": max,
        "up_to": n_max,
        "positive_beyond_zero": seq.beta_positive(1),
    });
    Ok(Report::json(&out, true))
}

pub fn cmd_subnormal(t: &ScalarTriplet, opts: &Opts) -> Result<Report> {
    let rep = is_subnormal(t)?;
    let seq = ShiftSequences::new(t.clone())?;
    let order = opts.hankel_order;
    let moments: Vec<f64> = (0..(2 * order + 2) as u64).map(|n| seq.gamma(n)).collect();
    let hankel = hankel_psd_oracle(&moments, order, opts.tol)?;
    let agree = match (rep.verdict.outcome, hankel.outcome) {
        (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Value::Null,
        (a, b) => Value::Bool(a == b),
    };
    let out = json!({
        "command": "subnormal",
        "outcome": rep.verdict.outcome,
        "citation": rep.verdict.citation,
        "verdict": rep.verdict,
        "berger": rep.berger,
        "hankel": hankel,
        "oracle_agrees": agree,
    });
    Ok(Report::json(&out, rep.verdict.outcome != Outcome::Inconclusive))
}

/// Final classification of `similar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Classification {
    Subnormal,
    NotSimilar,
    Similar,
    Inconclusive,
}

/// Everything `similar` computes, before formatting.
pub struct SimilarReport {
    pub classification: Classification,
    pub citation: Option<Citation>,
    pub value: Value,
}

pub fn similar_report(t: &ScalarTriplet, opts: &Opts) -> Result<SimilarReport> {
    let sub = is_subnormal(t)?;
    let necessary = necessary_conditions(t, DEFAULT_NECESSARY_DEPTH)?;
    let label = type_of(t);
    let dichotomy = if label.kind == ShiftType::III {
        None
    } else {
        Some(dichotomy_check(t)?)
    };
    let depth = opts.n_max.unwrap_or(crate::similarity::DEFAULT_BETA_DEPTH);
    let sufficient: Vec<Verdict> = if label.kind == ShiftType::III {
        vec![
            criterion_endpoint_atom(t)?,
            criterion_endpoint_mass(t, EpsilonRule::Harmonic, 500)?,
            criterion_weight_band(t, BAND_START, BAND_END)?,
            criterion_inequalities(t, IneqParams::default())?,
        ]
    } else {
        Vec::new()
    };
    let beta = similar_by_beta(t, depth, 0.0)?;

    let (classification, citation) = if sub.verdict.is_yes() {
        (Classification::Subnormal, Some(sub.verdict.citation))
    } else if let Some(d) = dichotomy.as_ref().filter(|d| d.is_no()) {
        (Classification::NotSimilar, Some(d.citation))
    } else if necessary.verdict.is_no() {
        (Classification::NotSimilar, Some(necessary.verdict.citation))
    } else if let Some(v) = sufficient.iter().chain([&beta]).find(|v| v.is_yes()) {
        (Classification::Similar, Some(v.citation))
    } else {
        (Classification::Inconclusive, None)
    };
    let mut notes = Vec::new();
    if sufficient.iter().any(Verdict::is_yes) && beta.is_no() {
        notes.push("a sufficient criterion holds while beta vanishes".to_string());
    }
    if t.b_negative() {
        notes.push("b < 0: sufficient criteria are outside their stated regime".to_string());
    }
    let value = json!({
        "command": "similar",
        "classification": classification,
        "citation": citation,
        "type": label,
        "subnormality": sub.verdict,
        "necessary": necessary,
        "dichotomy": dichotomy,
        "sufficient": sufficient,
        "beta_floor": beta,
        "notes": notes,
    });
    Ok(SimilarReport { classification, citation, value })
}

pub fn cmd_similar(t: &ScalarTriplet, opts: &Opts) -> Result<Report> {
    let r = similar_report(t, opts)?;
    Ok(Report::json(&r.value, r.classification != Classification::Inconclusive))
}

pub fn cmd_model(t: &ScalarTriplet, opts: &Opts) -> Result<Report> {
    let model = model_subnormal(t)?;
    let n_max = opts.n_max.unwrap_or(64);
    let check = b2_identity_check(t, n_max)?;
    let shown = n_max.min(32);
    let out = json!({
        "command": "model",
        "outcome": check.outcome,
        "citation": check.citation,
        "mu0": model.mu0,
        "berger": model.berger,
        "moments": model.moments(shown),
        "weights": model.weights(shown),
        "identity": check,
    });
    Ok(Report::json(&out, true))
}

pub fn cmd_compare(a: &MomentSource, b: &MomentSource, opts: &Opts) -> Result<Report> {
    let n = opts.n_max.unwrap_or(crate::quasiaffine::DEFAULT_RATIO_DEPTH);
    let forward = quasi_affine_test(a, b, n)?;
    let backward = quasi_affine_test(b, a, n)?;
    let sim = similarity_test(a, b, n)?;
    let inter = intertwiner_check(a, b, n.min(32) as usize)?;
    let classification = match sim.outcome {
        Outcome::Yes => "Similar",
        Outcome::No => "NotSimilar",
        Outcome::Inconclusive => "Inconclusive",
    };
    let out = json!({
        "command": "compare",
        "classification": classification,
        "outcome": sim.outcome,
        "citation": sim.citation,
        "a_quasi_affine_to_b": forward,
        "b_quasi_affine_to_a": backward,
        "similarity": sim,
        "intertwiner": inter,
    });
    Ok(Report::json(&out, sim.outcome != Outcome::Inconclusive))
}

/// CSV `n,gamma,lambda,beta`; the second column becomes `log_gamma` for the
/// whole file when any `γ_n` leaves the double range.
pub fn series_csv(t: &ScalarTriplet, n_max: u64) -> Result<String> {
    let seq = ShiftSequences::new(t.clone())?;
    let log_mode = (0..=n_max).any(|n| seq.gamma_scaled(n).log_scale != 0.0);
    let mut s = String::new();
    let head = if log_mode { "log_gamma" } else { "gamma" };
    writeln!(s, "n,{head},lambda,beta").expect("string write");
    for n in 0..=n_max {
        let g = if log_mode { seq.log_gamma(n) } else { seq.gamma(n) };
        writeln!(s, "{n},{g:.16e},{:.16e},{:.16e}", seq.weight(n), seq.beta(n)?).expect("string write");
    }
    Ok(s)
}

pub fn cmd_series(t: &ScalarTriplet, opts: &Opts) -> Result<Report> {
    let n_max = opts.n_max.unwrap_or(64);
    if opts.json {
        let seq = ShiftSequences::new(t.clone())?;
        let rows = (0..=n_max)
            .map(|n| {
                Ok(json!({
                    "n": n,
                    "log_gamma": seq.log_gamma(n),
                    "lambda": seq.weight(n),
                    "beta": seq.beta(n)?,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Report::json(&Value::Array(rows), true));
    }
    Ok(Report {
        body: series_csv(t, n_max)?,
        decided: true,
    })
}

pub fn cmd_examples(which: &ExampleCmd, report: bool) -> Result<Report> {
    let (triplet, full) = match *which {
        ExampleCmd::Wab { a, b } => {
            let w = wab_classify(a, b)?;
            let full = to_value(&w);
            match w.triplet {
                Some(t) => (Some(t), full),
                None => (None, full),
            }
        }
        ExampleCmd::First { b, c, atoms } => {
            let g = generate_example(ExampleCase::First { b, c }, atoms)?;
            (Some(g.triplet.clone()), to_value(&g))
        }
        ExampleCmd::Second { b, c, t, atoms } => {
            let g = generate_example(ExampleCase::Second { b, c, t }, atoms)?;
            (Some(g.triplet.clone()), to_value(&g))
        }
        ExampleCmd::Third { tau, t, theta, alpha, positive_c, atoms } => {
            let g = generate_example(ExampleCase::Third { tau, t, theta, alpha, positive_c }, atoms)?;
            (Some(g.triplet.clone()), to_value(&g))
        }
    };
    if report {
        return Ok(Report::json(&full, true));
    }
    match triplet {
        Some(t) => Ok(Report {
            body: serde_json::to_string(&t)?,
            decided: true,
        }),
        None => Err(Error::Domain("W_{a,b} is not CPD for these parameters (1 - 2a + ab < 0)".into())),
    }
}

fn run_triplet_cmd(command: &Command, input: &str, opts: &Opts) -> Result<Report> {
    let t = parse_triplet(input)?;
    debug!("parsed triplet {t}");
    match command {
        Command::Classify { .. } => cmd_classify(&t, opts),
        Command::Subnormal { .. } => cmd_subnormal(&t, opts),
        Command::Similar { .. } => cmd_similar(&t, opts),
        Command::Model { .. } => cmd_model(&t, opts),
        Command::Series { .. } => cmd_series(&t, opts),
        Command::Compare { .. } | Command::Examples { .. } => unreachable!("not a triplet command"),
    }
}

fn batch(command: &Command, path: &str, opts: &Opts) -> Result<(String, i32)> {
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    info!("batch of {} inputs", lines.len());
    let results: Vec<(String, i32)> = lines
        .par_iter()
        .map(|line| match run_triplet_cmd(command, line, opts) {
            Ok(r) => {
                let v: Value = serde_json::from_str(&r.body).unwrap_or(Value::String(r.body));
                (v.to_string(), if r.decided { 0 } else { 2 })
            }
            Err(e) => (json!({ "error": e.to_string() }).to_string(), 1),
        })
        .collect();
    let code = results.iter().map(|r| r.1).fold(0, |a, c| if a == 1 || c == 1 { 1 } else { a.max(c) });
    let body = results.into_iter().map(|r| r.0).collect::<Vec<_>>().join("\n");
    Ok((body, code))
}

fn dispatch(cli: &Cli) -> Result<(String, i32)> {
    let opts = &cli.opts;
    if opts.csv && !matches!(cli.command, Command::Series { .. }) {
        return Err(Error::Domain("--csv applies to the series command only".into()));
    }
    let single = |r: Report| (r.body, if r.decided { 0 } else { 2 });
    match &cli.command {
        Command::Compare { a, b } => Ok(single(cmd_compare(&parse_source(a)?, &parse_source(b)?, opts)?)),
        Command::Examples { which, report } => Ok(single(cmd_examples(which, *report)?)),
        Command::Classify { input }
        | Command::Subnormal { input }
        | Command::Similar { input }
        | Command::Model { input }
        | Command::Series { input } => match (&opts.batch, input) {
            (Some(path), None) => batch(&cli.command, path, opts),
            (None, Some(input)) => Ok(single(run_triplet_cmd(&cli.command, input, opts)?)),
            (Some(_), Some(_)) => Err(Error::Domain("give either an input or --batch, not both".into())),
            (None, None) => Err(Error::Domain("missing input (path or inline JSON)".into())),
        },
    }
}

/// Runs the CLI on `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match dispatch(&cli) {
        Ok((body, code)) => {
            let _ = writeln!(out, "{}", body.trim_end());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["cpdshift"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn classify_type_three() {
        let (code, out, _) = call(&["classify", r#"{"b":0,"c":0,"nu":{"atoms":[[2,1]]}}"#]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["type"]["kind"], "III");
        assert_eq!(v["citation"], "type-classification");
    }

    #[test]
    fn bad_input_exits_one() {
        let (code, _, err) = call(&["classify", r#"{"b":0,"c":-1}"#]);
        assert_eq!(code, 1);
        assert!(err.contains("negative"));
        let (code, _, err) = call(&["classify", r#"{"b":0,"c":0,"nu":{"atoms":[[2,1],[1.5,1]]}}"#]);
        assert_eq!(code, 1);
        assert!(err.contains("#1"));
    }

    #[test]
    fn csv_only_for_series() {
        assert_eq!(call(&["classify", "--csv", r#"{"b":0,"c":0}"#]).0, 1);
        let (code, out, _) = call(&["series", "--n-max", "3", r#"{"b":1,"c":0}"#]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "n,gamma,lambda,beta");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1,2.0000000000000000e0,"));
    }
}
