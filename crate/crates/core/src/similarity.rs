//! Sufficient criteria for similarity of a CPD shift to a subnormal shift,
//! and the model subnormal shift built from `ν + 2cδ₁`.

use serde::{Deserialize, Serialize};

use crate::cpd::{type_of, ScalarTriplet, ShiftSequences, ShiftType};
use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::verdict::{Citation, Outcome, Verdict};

pub const DEFAULT_BETA_DEPTH: u64 = 1000;
/// Prefix lengths beyond this are not scanned for the β floor.
pub const BETA_SCAN_CAP: u64 = 1_000_000;
pub const BAND_START: u64 = 32;
pub const BAND_END: u64 = 512;
pub const GRID_POINTS: usize = 64;
pub const MODEL_TOL: f64 = 1e-9;

const NOT_APPLICABLE_NEG_B: &str = "b < 0: outside the b >= 0 regime of the similarity criteria";

fn slack(x: f64) -> f64 {
    1e-12 * (1.0 + x.abs())
}

fn ge(a: f64, b: f64) -> bool {
    a >= b - slack(a.abs().max(b.abs()))
}

fn with_b_flag(v: Verdict, t: &ScalarTriplet) -> Verdict {
    if t.b_negative() {
        v.note(NOT_APPLICABLE_NEG_B)
    } else {
        v
    }
}

/// `ν` restricted to `(1, ∞)`: `(mass, ∫(x-1)^-2)` of that part.
fn upper_part(t: &ScalarTriplet) -> (f64, f64) {
    t.nu()
        .atoms()
        .iter()
        .filter(|&&(x, _)| x > 1.0)
        .fold((0.0, 0.0), |(m, i), &(x, w)| (m + w, i + w / ((x - 1.0) * (x - 1.0))))
}

/// Certifies `inf_n β_n > 0` (bounded inverse of the model intertwiner).
///
/// The prefix `n ≤ depth` is evaluated directly. When `ϑ = sup supp ν > 1`
/// with `w = ν({ϑ})`, every `n` satisfies
/// `β_n ≥ w / (P(n)ϑ^{-n} + ∫_{(1,ϑ]} (x-1)^-2 dν)` where
/// `P(n) = 1 + b⁺n + (c + ν([0,1))/2)n²`, and `P(n)ϑ^{-n}` is decreasing
/// beyond the largest root of `P' - P·ln ϑ`; this bounds the whole tail.
pub fn similar_by_beta(t: &ScalarTriplet, depth: u64, eps_floor: f64) -> Result<Verdict> {
    let seq = ShiftSequences::new(t.clone())?;
    let base = |o| with_b_flag(Verdict::new("similar_by_beta", o, Citation::DefectFloor), t);

    if !seq.beta_positive(1) {
        let kind = type_of(t).kind;
        return Ok(base(Outcome::No)
            .with("beta_1", seq.beta(1)?)
            .with("type", format!("{kind:?}"))
            .note("beta_n = 0 for every n >= 1"));
    }

    let theta = t.theta().filter(|&th| th > 1.0);
    let tail_start = match theta {
        Some(th) => decreasing_from(t, th),
        None => 0,
    };
    let scan = depth.max(tail_start);
    if scan > BETA_SCAN_CAP {
        return Ok(base(Outcome::Inconclusive)
            .with("tail_start", tail_start)
            .note("tail certificate starts beyond the scan cap"));
    }
    let mut prefix_min = f64::INFINITY;
    let mut argmin = 0;
    for n in 0..=scan {
        let b = seq.beta(n)?;
        if b < prefix_min {
            prefix_min = b;
            argmin = n;
        }
    }
    let v = base(Outcome::Inconclusive)
        .with("prefix_min", prefix_min)
        .with("prefix_argmin", argmin)
        .with("checked_up_to", scan);

    let Some(th) = theta else {
        return Ok(v.note("sup supp nu <= 1: no tail certificate"));
    };
    let w = t.nu().mass_at(th);
    let (upper_mass, upper_i2) = upper_part(t);
    let p = poly_bound(t);
    let tail_floor = w / (p.eval(tail_start as f64) * (-(tail_start as f64) * th.ln()).exp() + upper_i2);
    let eps = prefix_min.min(tail_floor);
    let liminf = (w / upper_i2) / (2.0 * t.c() / upper_mass + 2.0);
    let v = v
        .with("tail_start", tail_start)
        .with("tail_floor", tail_floor)
        .with("epsilon", eps)
        .with("liminf_bound", liminf);
    if eps > 0.0 && eps >= eps_floor {
        Ok(Verdict { outcome: Outcome::Yes, ..v })
    } else {
        Ok(v.note("certified floor below the requested minimum"))
    }
}

/// `a0 + a1·n + a2·n²` bounding the non-geometric part of `γ_n` from above.
struct Poly {
    a1: f64,
    a2: f64,
}

impl Poly {
    fn eval(&self, x: f64) -> f64 {
        1.0 + self.a1 * x + self.a2 * x * x
    }
}

fn poly_bound(t: &ScalarTriplet) -> Poly {
    let lower = t.nu().restrict(|x| x < 1.0).total_mass();
    Poly {
        a1: t.b().max(0.0),
        a2: t.c() + lower / 2.0,
    }
}

/// First integer beyond which `P(x)ϑ^{-x}` is nonincreasing.
fn decreasing_from(t: &ScalarTriplet, theta: f64) -> u64 {
    let p = poly_bound(t);
    let l = theta.ln();
    // P' - l·P = -l·a2·x² + (2a2 - l·a1)x + (a1 - l)
    let (qa, qb, qc) = (-l * p.a2, 2.0 * p.a2 - l * p.a1, p.a1 - l);
    let root = if qa == 0.0 {
        if qb == 0.0 {
            0.0
        } else {
            -qc / qb
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            0.0
        } else {
            // qa < 0: the larger root
            let s = disc.sqrt();
            ((-qb - s) / (2.0 * qa)).max((-qb + s) / (2.0 * qa))
        }
    };
    root.max(0.0).ceil() as u64
}

/// Tags the conditions that rule out subnormality.
fn non_subnormal_flags(t: &ScalarTriplet, v: Verdict) -> Verdict {
    let r = t.nu().resolvent_integrals();
    let i1 = r.i1.unwrap_or(f64::NAN);
    let a = r.i2 > 1.0;
    let b = (t.b() - i1).abs() > 1e-12;
    let c = t.c() > 0.0;
    v.with("flag_a_mass_exceeds_one", a)
        .with("flag_b_drift_mismatch", b)
        .with("flag_c_quadratic", c)
        .with("not_subnormal", a || b || c)
}

/// Yes iff `ν` has an atom at `ϑ = sup supp ν > 1` (always the case for a
/// finitely atomic `ν` with `ϑ > 1`).
pub fn criterion_endpoint_atom(t: &ScalarTriplet) -> Result<Verdict> {
    ShiftSequences::new(t.clone())?;
    let base = |o| with_b_flag(Verdict::new("endpoint_atom", o, Citation::EndpointAtom), t);
    match t.theta().filter(|&th| th > 1.0) {
        Some(th) => {
            let v = base(Outcome::Yes)
                .with("theta", th)
                .with("endpoint_mass", t.nu().mass_at(th))
                .with("upper_i2", upper_part(t).1);
            Ok(non_subnormal_flags(t, v))
        }
        None => Ok(base(Outcome::No).note("sup supp nu <= 1: criterion not satisfied")),
    }
}

/// Rule for the shrinking window `[ϑ - ε_n, ϑ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonRule {
    /// `ε_n = 1/n`.
    #[default]
    Harmonic,
    /// `ε_n = n^{-p}`, `p > 0`.
    Power(f64),
}

impl EpsilonRule {
    fn at(self, n: u64) -> f64 {
        let nf = n as f64;
        match self {
            EpsilonRule::Harmonic => 1.0 / nf,
            EpsilonRule::Power(p) => nf.powf(-p),
        }
    }

    /// `lim (1 - ε_n/ϑ)^n`.
    fn limit_factor(self, theta: f64) -> f64 {
        let p = match self {
            EpsilonRule::Harmonic => 1.0,
            EpsilonRule::Power(p) => p,
        };
        if p > 1.0 {
            1.0
        } else if p == 1.0 {
            (-1.0 / theta).exp()
        } else {
            0.0
        }
    }
}

/// `liminf ν([ϑ-ε_n, ϑ])(1 - ε_n/ϑ)^n > 0`, evaluated for `n ≤ depth` and in
/// closed form.
pub fn criterion_endpoint_mass(t: &ScalarTriplet, rule: EpsilonRule, depth: u64) -> Result<Verdict> {
    ShiftSequences::new(t.clone())?;
    if let EpsilonRule::Power(p) = rule {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("epsilon exponent {p} must be positive")));
        }
    }
    let base = |o| with_b_flag(Verdict::new("endpoint_mass", o, Citation::EndpointMass), t);
    let Some(th) = t.theta().filter(|&th| th > 1.0) else {
        return Ok(base(Outcome::Inconclusive).note("not applicable: sup supp nu <= 1"));
    };
    let term = |n: u64| {
        let e = rule.at(n);
        let window = t.nu().restrict(|x| x >= th - e).total_mass();
        window * (n as f64 * (-e / th).ln_1p()).exp()
    };
    let depth = depth.max(2);
    let tail_min = (depth / 2..=depth)
        .filter(|&n| th - rule.at(n) > 1.0)
        .map(term)
        .fold(f64::INFINITY, f64::min);
    let limit = t.nu().mass_at(th) * rule.limit_factor(th);
    let outcome = if limit > 0.0 { Outcome::Yes } else { Outcome::Inconclusive };
    Ok(non_subnormal_flags(
        t,
        base(outcome)
            .with("theta", th)
            .with("limit", limit)
            .with("tail_min", tail_min)
            .with("depth", depth),
    ))
}

/// Eventual band for `λ_n²`, read off `n ∈ [from, to]`:
/// (ii) `λ_n² ≥ 1 + τ` with `τ ≥ 1`, or (i) `1 + τ ≤ λ_n² ≤ 1 + M` with
/// `(1 - τ)(1 + M) < 1`.
pub fn criterion_weight_band(t: &ScalarTriplet, from: u64, to: u64) -> Result<Verdict> {
    if from > to {
        return Err(Error::Domain(format!("empty index window [{from}, {to}]")));
    }
    let seq = ShiftSequences::new(t.clone())?;
    let (lo, hi) = (from..=to)
        .map(|n| seq.weight_sq(n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r), h.max(r)));
    let v = with_b_flag(
        Verdict::new("weight_band", Outcome::Inconclusive, Citation::WeightBand),
        t,
    )
    .with("from", from)
    .with("to", to)
    .with("tail_min", lo)
    .with("tail_max", hi);
    if lo >= 2.0 {
        return Ok(Verdict { outcome: Outcome::Yes, ..v }
            .with("branch", "ii")
            .with("tau", lo - 1.0));
    }
    if lo > 1.0 && (2.0 - lo) * hi < 1.0 {
        return Ok(Verdict { outcome: Outcome::Yes, ..v }
            .with("branch", "i")
            .with("tau", lo - 1.0)
            .with("m", hi - 1.0));
    }
    Ok(v.note("tail band does not fit either branch"))
}

/// Optional fixed parameters for the second and third inequality families.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IneqParams {
    pub t: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IneqFamily {
    I,
    II,
    III,
}

struct Data {
    b: f64,
    c: f64,
    mass: f64,
    inf: f64,
    sup: f64,
}

fn family_i(d: &Data) -> bool {
    ge(d.b + d.c, 1.0)
        && ge(2.0 * d.c + d.mass * (1.0 - d.c), d.b)
        && ge(d.mass, 1.0)
        && ge(d.inf, 2.0 * (1.0 + d.c))
}

fn family_ii(d: &Data, t: f64) -> bool {
    t > 0.0
        && ge(d.b + d.c + d.mass * t * (1.0 + t), 1.0)
        && ge(2.0 * d.c + d.mass * (1.0 - 2.0 * t - 1.5 * t * t), d.b)
        && ge(d.mass * t * (2.0 + t), 2.0 * d.c)
        && ge(d.inf, 2.0 + t)
}

fn family_iii(d: &Data, t: f64, tau: f64) -> bool {
    t > 0.0
        && tau > 0.0
        && tau < 1.0
        && ge(d.b + d.c, tau)
        && ge(2.0 * d.c + d.mass * (1.0 - t / 2.0), tau * d.b)
        && ge(d.mass * t, 2.0 * tau * d.c)
        && ge(d.sup - 1.0, d.b + d.c)
        && ge((d.sup - 1.0) * d.b, 2.0 * d.c + d.mass)
        && (1.0 - tau) * d.sup < 1.0
        && ge(d.inf, 1.0 + tau + t)
}

/// The three inequality families on `(b, c, ν(ℝ₊), inf supp ν, sup supp ν)`
/// for `b ≥ 0`. Missing `t`/`τ` are searched on a grid of
/// [`GRID_POINTS`] points per axis over the admissible window.
pub fn criterion_inequalities(t: &ScalarTriplet, params: IneqParams) -> Result<Verdict> {
    ShiftSequences::new(t.clone())?;
    let v = Verdict::new("triplet_inequalities", Outcome::No, Citation::TripletInequalities);
    if t.b_negative() {
        return Ok(Verdict { outcome: Outcome::Inconclusive, ..v }.note(NOT_APPLICABLE_NEG_B));
    }
    let (Some(inf), Some(sup)) = (t.nu().inf_support(), t.theta()) else {
        return Ok(v.note("nu = 0: no family applies"));
    };
    let d = Data {
        b: t.b(),
        c: t.c(),
        mass: t.nu().total_mass(),
        inf,
        sup,
    };
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        if hi <= lo {
            return Vec::new();
        }
        (1..=GRID_POINTS)
            .map(|k| lo + (hi - lo) * k as f64 / GRID_POINTS as f64)
            .collect()
    };

    let mut families = Vec::new();
    let mut v = v;
    if family_i(&d) {
        families.push(IneqFamily::I);
    }
    let ts = match params.t {
        Some(x) => vec![x],
        None => grid(0.0, inf - 2.0),
    };
    if let Some(&tt) = ts.iter().find(|&&tt| family_ii(&d, tt)) {
        families.push(IneqFamily::II);
        v = v.with("t_ii", tt);
    }
    let taus = match params.tau {
        Some(x) => vec![x],
        None => {
            let lo = (1.0 - 1.0 / sup).max(0.0);
            grid(lo, 1.0)
                .into_iter()
                .take(GRID_POINTS - 1)
                .collect::<Vec<_>>()
        }
    };
    'outer: for &tau in &taus {
        let ts = match params.t {
            Some(x) => vec![x],
            None => grid(0.0, inf - 1.0 - tau),
        };
        for &tt in &ts {
            if family_iii(&d, tt, tau) {
                families.push(IneqFamily::III);
                v = v.with("t_iii", tt).with("tau_iii", tau);
                break 'outer;
            }
        }
    }
    let v = v.with(
        "families",
        serde_json::to_value(&families).expect("families serialize"),
    );
    if families.is_empty() {
        Ok(v.note("no family satisfied: criterion says nothing about similarity"))
    } else {
        Ok(non_subnormal_flags(t, Verdict { outcome: Outcome::Yes, ..v }))
    }
}

/// The model subnormal shift of a type III triplet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSubnormal {
    /// `ν + 2cδ₁`.
    pub mu0: AtomicMeasure,
    /// `μ₀ / μ₀(ℝ₊)`, the Berger measure of the model shift.
    pub berger: AtomicMeasure,
}

impl ModelSubnormal {
    pub fn moments(&self, n_max: u64) -> Vec<f64> {
        (0..=n_max).map(|n| self.berger.moment(n)).collect()
    }

    /// `ω_n = √(m_{n+1}/m_n)`.
    pub fn weights(&self, n_max: u64) -> Vec<f64> {
        (0..n_max)
            .map(|n| (0.5 * (self.berger.log_moment(n + 1) - self.berger.log_moment(n))).exp())
            .collect()
    }
}

pub fn model_subnormal(t: &ScalarTriplet) -> Result<ModelSubnormal> {
    ShiftSequences::new(t.clone())?;
    if type_of(t).kind != ShiftType::III {
        return Err(Error::WrongType(
            "model degenerates: the completion has dimension at most 1 for types I/II".into(),
        ));
    }
    let mu0 = if t.c() > 0.0 {
        t.nu().add(&AtomicMeasure::dirac(1.0, 2.0 * t.c())?)?
    } else {
        t.nu().clone()
    };
    let berger = mu0.normalize()?;
    Ok(ModelSubnormal { mu0, berger })
}

/// `γ_n β_n = ∫x^n d(ν + 2cδ₁)` for `n ≤ depth`, with `β_n` taken from the
/// weights, so the left side is the second difference of `γ`.
pub fn b2_identity_check(t: &ScalarTriplet, depth: u64) -> Result<Verdict> {
    let seq = ShiftSequences::new(t.clone())?;
    let mut worst = 0.0f64;
    let mut worst_n = 0;
    for n in 0..=depth {
        let r0 = seq.weight_sq(n);
        let r1 = seq.weight_sq(n + 1);
        let lhs = 1.0 - 2.0 * r0 + r0 * r1;
        let rhs = seq.beta_closed(n);
        let err = (lhs - rhs).abs() / (1.0 + 2.0 * r0 + r0 * r1).max(rhs.abs());
        if err > worst {
            worst = err;
            worst_n = n;
        }
    }
    let outcome = if worst <= MODEL_TOL { Outcome::Yes } else { Outcome::No };
    Ok(Verdict::new("model_identity", outcome, Citation::ModelIdentity)
        .with("depth", depth)
        .with("worst_relative_error", worst)
        .with("worst_index", worst_n))
}
