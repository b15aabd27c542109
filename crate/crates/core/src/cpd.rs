//! Scalar representing triplets `(b, c, ν)` and the weighted shifts they generate.
//!
//! A triplet produces the formal moment sequence
//! `γ_n = 1 + b·n + c·n² + ∫ Q_n dν`, the weights `λ_n = √(γ_{n+1}/γ_n)` and
//! the defect diagonal `β_n = 1 - 2λ_n² + λ_n²λ_{n+1}²`.

use std::fmt;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::verdict::{Citation, Outcome, Verdict};

/// Below this distance from 1, `Q_n` avoids the closed form.
pub const Q_SWITCH: f64 = 1e-4;

/// Values of `γ_n` beyond this switch to scaled (log-domain) evaluation.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Relative agreement required between the two routes to `β_n`.
pub const BETA_AGREEMENT_TOL: f64 = 1e-9;

/// Largest index probed when searching for the turning point of `γ`.
pub const SEARCH_CAP: u64 = 1 << 52;

/// Absolute tolerance for the boundary equalities `b = -Γ₁` and `Γ₂ = 1`.
pub const BOUNDARY_TOL: f64 = 1e-12;

const SUM_CUTOFF: u64 = 4096;
const MEMO_CAP: usize = 1 << 16;

/// `Σ_{j=0}^{n-2} (n-j-1) x^j` by Horner's rule.
pub fn q_poly_sum(n: u64, x: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for j in (0..=n - 2).rev() {
        acc = acc * x + (n - 1 - j) as f64;
    }
    acc
}

/// `(x^n - 1 - n(x-1)) / (x-1)²`, evaluated through `expm1`/`ln_1p`.
pub fn q_poly_closed(n: u64, x: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let d = x - 1.0;
    let nf = n as f64;
    let num = (nf * d.ln_1p()).exp_m1() - nf * d;
    num / (d * d)
}

/// The polynomial `Q_n`: `0` for `n = 0, 1`, otherwise `Σ_{j=0}^{n-2}(n-j-1)x^j`.
pub fn q_poly(n: u64, x: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let d = x - 1.0;
    if n <= SUM_CUTOFF && x >= 0.0 {
        // positive terms: Horner is accurate to a few ulps
        return q_poly_sum(n, x);
    }
    if d.abs() >= Q_SWITCH {
        return q_poly_closed(n, x);
    }
    let nf = n as f64;
    if nf * d.abs() <= 1.0 {
        // Σ_{k≥2} C(n,k) d^{k-2}
        let mut term = nf * (nf - 1.0) / 2.0;
        let mut sum = term;
        let mut k = 2.0;
        while k < nf {
            term *= (nf - k) / (k + 1.0) * d;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        q_poly_closed(n, x)
    }
}

/// `Σ_{j=0}^{n-1} x^j`, the first difference `Q_{n+1} - Q_n`.
fn geom_sum(n: u64, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let d = x - 1.0;
    let nf = n as f64;
    if n <= SUM_CUTOFF && x >= 0.0 {
        let mut acc = 0.0;
        for _ in 0..n {
            acc = acc * x + 1.0;
        }
        return acc;
    }
    if d.abs() >= Q_SWITCH {
        return (nf * d.ln_1p()).exp_m1() / d;
    }
    if nf * d.abs() <= 1.0 {
        let mut term = nf;
        let mut sum = term;
        let mut k = 1.0;
        while k < nf {
            term *= (nf - k) / (k + 1.0) * d;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        (nf * d.ln_1p()).exp_m1() / d
    }
}

/// Checks `Q_{n+1}(x) = x·Q_n(x) + n` to relative precision `1e-12`.
pub fn q_recurrence_check(n: u64, x: f64) -> bool {
    let lhs = q_poly(n + 1, x);
    let rhs = x * q_poly(n, x) + n as f64;
    (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs())
}

/// `x^n · e^{-scale}` without intermediate overflow; `0^0 = 1`.
fn pow_scaled(x: f64, n: u64, scale: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { (-scale).exp() } else { 0.0 };
    }
    if scale == 0.0 {
        x.powf(n as f64)
    } else {
        (n as f64 * x.ln() - scale).exp()
    }
}

/// A positive number stored as `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }

    /// Plain value; `+∞` when it does not fit a double.
    pub fn value(&self) -> f64 {
        if self.log_scale == 0.0 {
            self.mantissa
        } else {
            (self.ln()).exp()
        }
    }
}

/// The scalar representing triplet `(b, c, ν)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTriplet")]
pub struct ScalarTriplet {
    b: f64,
    c: f64,
    nu: AtomicMeasure,
}

#[derive(Deserialize)]
struct RawTriplet {
    b: f64,
    c: f64,
    #[serde(default)]
    nu: AtomicMeasure,
}

impl TryFrom<RawTriplet> for ScalarTriplet {
    type Error = Error;

    fn try_from(raw: RawTriplet) -> Result<Self> {
        ScalarTriplet::new(raw.b, raw.c, raw.nu)
    }
}

impl ScalarTriplet {
    /// Rejects `c < 0`, non-finite parameters and atoms of `ν` at 1.
    pub fn new(b: f64, c: f64, nu: AtomicMeasure) -> Result<Self> {
        if !b.is_finite() || !c.is_finite() {
            return Err(Error::InvalidTriplet("b and c must be finite".into()));
        }
        if c < 0.0 {
            return Err(Error::InvalidTriplet(format!("c = {c} is negative")));
        }
        if nu.atoms().iter().any(|&(x, _)| x == 1.0) {
            return Err(Error::InvalidTriplet("nu has an atom at 1".into()));
        }
        Ok(Self { b, c, nu })
    }

    /// `(b, c, ν)` with `ν` given as raw `(point, mass)` pairs.
    pub fn from_parts(b: f64, c: f64, atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(b, c, AtomicMeasure::new(atoms.to_vec())?)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn nu(&self) -> &AtomicMeasure {
        &self.nu
    }

    /// `sup supp ν`, `None` when `ν = 0`.
    pub fn theta(&self) -> Option<f64> {
        self.nu.sup_support()
    }

    pub fn b_negative(&self) -> bool {
        self.b < 0.0
    }

    fn is_low(x: f64) -> bool {
        x < 1.0 - Q_SWITCH
    }

    /// `(1 - Σ_low w/(1-x)², b + Σ_low w/(1-x))` over atoms well below 1.
    ///
    /// For those atoms `Q_n(x) = x^n/(1-x)² - 1/(1-x)² + n/(1-x)`, which keeps
    /// `γ_n` accurate when the constant and linear parts nearly cancel.
    fn low_constants(&self) -> (f64, f64) {
        self.nu
            .atoms()
            .iter()
            .filter(|&&(x, _)| Self::is_low(x))
            .fold((1.0, self.b), |(a, l), &(x, w)| {
                let e = 1.0 - x;
                (a - w / (e * e), l + w / e)
            })
    }

    /// `γ_n · e^{-scale}`.
    pub(crate) fn gamma_at_scale(&self, n: u64, scale: f64) -> f64 {
        let nf = n as f64;
        let (a, l) = self.low_constants();
        let damp = (-scale).exp();
        let mut v = (a + nf * l + self.c * nf * nf) * damp;
        for &(x, w) in self.nu.atoms() {
            if Self::is_low(x) {
                let e = 1.0 - x;
                v += w * pow_scaled(x, n, scale) / (e * e);
            } else if scale == 0.0 || (x - 1.0).abs() < Q_SWITCH {
                v += w * q_poly(n, x) * damp;
            } else {
                let d = x - 1.0;
                v += w * (pow_scaled(x, n, scale) - (1.0 + nf * d) * damp) / (d * d);
            }
        }
        v
    }

    /// `∫ x^n dν · e^{-scale}`.
    pub(crate) fn moment_at_scale(&self, n: u64, scale: f64) -> f64 {
        self.nu
            .atoms()
            .iter()
            .map(|&(x, w)| w * pow_scaled(x, n, scale))
            .sum()
    }

    /// `γ_n` as a scaled number; the scale is `n·ln ϑ` once `γ_n` exceeds `1e300`.
    pub fn gamma_scaled(&self, n: u64) -> Scaled {
        let v = self.gamma_at_scale(n, 0.0);
        if v.is_finite() && v.abs() <= OVERFLOW_GUARD {
            return Scaled {
                mantissa: v,
                log_scale: 0.0,
            };
        }
        match self.theta() {
            Some(t) if t > 1.0 => {
                let scale = n as f64 * t.ln();
                Scaled {
                    mantissa: self.gamma_at_scale(n, scale),
                    log_scale: scale,
                }
            }
            _ => Scaled {
                mantissa: v,
                log_scale: 0.0,
            },
        }
    }

    /// `γ_n` straight from the formula, without checking positivity.
    pub fn gamma_raw(&self, n: u64) -> f64 {
        self.gamma_scaled(n).value()
    }

    /// `γ_{n+1} - γ_n = b + c(2n+1) + ∫ Σ_{j<n} x^j dν`.
    pub fn delta_gamma(&self, n: u64) -> f64 {
        let nf = n as f64;
        let (_, l) = self.low_constants();
        let mut v = l + self.c * (2.0 * nf + 1.0);
        for &(x, w) in self.nu.atoms() {
            if Self::is_low(x) {
                v -= w * pow_scaled(x, n, 0.0) / (1.0 - x);
            } else {
                v += w * geom_sum(n, x);
            }
        }
        v
    }

    /// `∫ 1/(1-x)^j dν` for `j = 1, 2` (finite: `ν` has no atom at 1).
    pub fn gammas(&self) -> (f64, f64) {
        let r = self.nu.resolvent_integrals();
        (-r.i1.unwrap_or(f64::NAN), r.i2)
    }
}

impl fmt::Display for ScalarTriplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(b={}, c={}, nu={:?})", self.b, self.c, self.nu.atoms())
    }
}

/// Row of the classification of the admissible set of `b` for fixed `(c, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaCase {
    /// Row number 1..=7.
    pub case: u8,
    /// `-Γ₁` in rows 5-7; `None` where the infimum has no closed form.
    pub lower: Option<f64>,
    pub closed: bool,
}

/// Locates `(c, ν)` in the case table for the admissible `b`.
pub fn omega_case(t: &ScalarTriplet) -> OmegaCase {
    let theta = t.theta().unwrap_or(f64::NEG_INFINITY);
    if theta > 1.0 {
        return OmegaCase { case: 1, lower: None, closed: false };
    }
    if t.c() > 0.0 {
        return OmegaCase { case: 2, lower: None, closed: false };
    }
    // no atom at 1 and support in [0, 1): Γ₁ is finite, so row 3 never occurs
    let (g1, g2) = t.gammas();
    if g2 > 1.0 + BOUNDARY_TOL {
        return OmegaCase { case: 4, lower: None, closed: false };
    }
    if g2 >= 1.0 - BOUNDARY_TOL {
        let is_delta0 = t.nu().len() == 1 && t.nu().atoms()[0].0 == 0.0;
        return OmegaCase {
            case: if is_delta0 { 5 } else { 6 },
            lower: Some(-g1),
            closed: !is_delta0,
        };
    }
    OmegaCase { case: 7, lower: Some(-g1), closed: true }
}

/// What the case table alone says about positivity, when it decides it.
pub fn table_decision(t: &ScalarTriplet) -> Option<bool> {
    if t.b() >= 0.0 {
        return Some(true);
    }
    let row = omega_case(t);
    match row.lower {
        Some(lo) => {
            let tol = BOUNDARY_TOL * (1.0 + lo.abs());
            if (t.b() - lo).abs() <= tol {
                Some(row.closed)
            } else {
                Some(t.b() > lo)
            }
        }
        None if row.case == 4 => {
            let (g1, _) = t.gammas();
            if t.b() <= -g1 {
                Some(false)
            } else {
                None
            }
        }
        None => None,
    }
}

/// Decides whether `γ_n > 0` for every `n`.
///
/// `Δ²γ_n = 2c + ∫x^n dν ≥ 0`, so `Δγ` is nondecreasing: `γ` decreases until
/// the first `n*` with `Δγ_{n*} ≥ 0` and increases afterwards. The turning
/// point is located by exponential and binary search; if `Δγ` never turns
/// (only possible for `c = 0`, `supp ν ⊂ [0,1)`), the limits
/// `Δγ_∞ = b + Γ₁` and `γ_∞ = 1 - Γ₂` decide.
pub fn validate_triplet(t: &ScalarTriplet) -> Verdict {
    let base = |outcome| {
        let mut v = Verdict::new("validate_triplet", outcome, Citation::SequencePositivity);
        let row = omega_case(t);
        v = v.with("table_case", row.case);
        if t.b_negative() {
            v = v.note("b < 0: outside the b >= 0 regime of the similarity criteria");
        }
        v
    };

    // c = 0, supp ν ⊂ [0,1): unless Δγ_∞ > 0, the limits decide
    let below_one = t.theta().is_none_or(|th| th < 1.0);
    let limit_case = t.c() == 0.0 && below_one && {
        let (g1, _) = t.gammas();
        t.b() + g1 <= BOUNDARY_TOL * (1.0 + t.b().abs() + g1)
    };
    let turning = if limit_case {
        None
    } else {
        first_index(SEARCH_CAP, |n| t.delta_gamma(n) >= 0.0)
    };
    let verdict = match turning {
        Some(n_star) => {
            let min_gamma = t.gamma_raw(n_star);
            if min_gamma > 0.0 {
                base(Outcome::Yes)
                    .with("turning_index", n_star)
                    .with("min_gamma", min_gamma)
            } else {
                let witness = first_index(n_star, |n| t.gamma_raw(n) <= 0.0).unwrap_or(n_star);
                base(Outcome::No)
                    .with("turning_index", n_star)
                    .with("witness_index", witness)
                    .with("witness_gamma", t.gamma_raw(witness))
            }
        }
        None => limit_branch(t, base),
    };

    match (table_decision(t), verdict.outcome) {
        (Some(expected), Outcome::Yes | Outcome::No) if expected != verdict.is_yes() => verdict
            .note("case table disagrees with the direct positivity search"),
        _ => verdict,
    }
}

fn limit_branch(t: &ScalarTriplet, base: impl Fn(Outcome) -> Verdict) -> Verdict {
    let below_one = t.theta().is_none_or(|th| th < 1.0);
    if t.c() != 0.0 || !below_one {
        return base(Outcome::Inconclusive).with("search_cap", SEARCH_CAP);
    }
    let (g1, g2) = t.gammas();
    let slope = t.b() + g1;
    let tol = BOUNDARY_TOL * (1.0 + t.b().abs() + g1);
    if slope < -tol {
        let witness = first_index(SEARCH_CAP, |n| t.gamma_raw(n) <= 0.0);
        let mut v = base(Outcome::No).with("limit_slope", slope);
        if let Some(w) = witness {
            v = v.with("witness_index", w);
        }
        return v;
    }
    if slope > tol {
        return base(Outcome::Inconclusive)
            .with("limit_slope", slope)
            .with("search_cap", SEARCH_CAP);
    }
    let limit = 1.0 - g2;
    let positive = if limit.abs() <= BOUNDARY_TOL {
        // γ_n = Σ w x^n / (1-x)² for n ≥ 1
        t.nu().atoms().iter().any(|&(x, _)| x > 0.0)
    } else {
        limit > 0.0
    };
    let mut v = base(if positive { Outcome::Yes } else { Outcome::No })
        .with("limit_slope", slope)
        .with("limit_gamma", limit);
    if !positive {
        if let Some(w) = first_index(SEARCH_CAP, |n| t.gamma_raw(n) <= 0.0) {
            v = v.with("witness_index", w);
        }
    }
    v
}

/// Smallest `n ∈ [0, cap]` with `pred(n)`, for a predicate monotone in `n`.
fn first_index(cap: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if pred(0) {
        return Some(0);
    }
    let mut lo = 0u64; // pred(lo) false
    let mut hi = 1u64;
    while !pred(hi) {
        if hi >= cap {
            return None;
        }
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `γ`, `λ` and `β` of a validated triplet, with a memoized prefix of `γ`.
#[derive(Debug)]
pub struct ShiftSequences {
    triplet: ScalarTriplet,
    memo: RwLock<Vec<Scaled>>,
}

impl Clone for ShiftSequences {
    fn clone(&self) -> Self {
        Self {
            triplet: self.triplet.clone(),
            memo: RwLock::new(self.memo.read().expect("memo lock").clone()),
        }
    }
}

impl ShiftSequences {
    pub fn new(triplet: ScalarTriplet) -> Result<Self> {
        let v = validate_triplet(&triplet);
        match v.outcome {
            Outcome::Yes => Ok(Self {
                triplet,
                memo: RwLock::new(Vec::new()),
            }),
            Outcome::No => Err(Error::NonPositiveSequence {
                witness: v.witnesses.get("witness_index").and_then(|w| w.as_u64()),
            }),
            Outcome::Inconclusive => Err(Error::Undecided),
        }
    }

    pub fn triplet(&self) -> &ScalarTriplet {
        &self.triplet
    }

    pub fn gamma_scaled(&self, n: u64) -> Scaled {
        let idx = n as usize;
        if idx >= MEMO_CAP {
            return self.triplet.gamma_scaled(n);
        }
        if let Some(&g) = self.memo.read().expect("memo lock").get(idx) {
            return g;
        }
        let mut memo = self.memo.write().expect("memo lock");
        while memo.len() <= idx {
            let k = memo.len() as u64;
            memo.push(self.triplet.gamma_scaled(k));
        }
        memo[idx]
    }

    /// `γ_n`; `+∞` past the double range (use [`Self::log_gamma`] there).
    pub fn gamma(&self, n: u64) -> f64 {
        self.gamma_scaled(n).value()
    }

    pub fn log_gamma(&self, n: u64) -> f64 {
        self.gamma_scaled(n).ln()
    }

    /// Common scale for indices `n` and `n + k`.
    fn joint_scale(&self, n: u64) -> f64 {
        let g = self.gamma_scaled(n + 2);
        if g.log_scale == 0.0 {
            0.0
        } else {
            n as f64 * self.triplet.theta().expect("scaled gamma has theta > 1").ln()
        }
    }

    /// `λ_n² = γ_{n+1}/γ_n`.
    pub fn weight_sq(&self, n: u64) -> f64 {
        let s = self.joint_scale(n);
        if s == 0.0 {
            self.gamma_scaled(n + 1).mantissa / self.gamma_scaled(n).mantissa
        } else {
            self.triplet.gamma_at_scale(n + 1, s) / self.triplet.gamma_at_scale(n, s)
        }
    }

    pub fn weight(&self, n: u64) -> f64 {
        self.weight_sq(n).sqrt()
    }

    /// `(2c + ∫x^n dν) / γ_n`.
    pub fn beta_closed(&self, n: u64) -> f64 {
        let s = self.joint_scale(n);
        let t = &self.triplet;
        if s == 0.0 {
            (2.0 * t.c() + t.nu().moment(n)) / self.gamma_scaled(n).mantissa
        } else {
            (2.0 * t.c() * (-s).exp() + t.moment_at_scale(n, s)) / t.gamma_at_scale(n, s)
        }
    }

    /// `1 - 2λ_n² + λ_n²λ_{n+1}²`.
    pub fn beta_from_weights(&self, n: u64) -> f64 {
        let r0 = self.weight_sq(n);
        let r1 = self.weight_sq(n + 1);
        1.0 - 2.0 * r0 + r0 * r1
    }

    /// `β_n` by the closed form, checked against the weight formula.
    ///
    /// The weight formula cancels terms of size `1 + 2λ_n² + λ_n²λ_{n+1}²`,
    /// so agreement is measured relative to that size.
    pub fn beta(&self, n: u64) -> Result<f64> {
        let closed = self.beta_closed(n);
        let r0 = self.weight_sq(n);
        let r1 = self.weight_sq(n + 1);
        let direct = 1.0 - 2.0 * r0 + r0 * r1;
        let size = closed.abs().max(1.0 + 2.0 * r0 + r0 * r1);
        if (closed - direct).abs() <= BETA_AGREEMENT_TOL * size {
            Ok(closed)
        } else {
            Err(Error::BetaMismatch { n, closed, direct })
        }
    }

    /// `β_n > 0` decided from the data: the numerator `2c + ∫x^n dν` is
    /// positive iff `c > 0` or `ν` charges a positive point (or `n = 0`, `ν ≠ 0`).
    pub fn beta_positive(&self, n: u64) -> bool {
        let t = &self.triplet;
        t.c() > 0.0 || t.nu().atoms().iter().any(|&(x, _)| x > 0.0 || n == 0)
    }
}

pub fn gamma(t: &ScalarTriplet, n: u64) -> Result<f64> {
    Ok(ShiftSequences::new(t.clone())?.gamma(n))
}

pub fn weight(t: &ScalarTriplet, n: u64) -> Result<f64> {
    Ok(ShiftSequences::new(t.clone())?.weight(n))
}

pub fn beta(t: &ScalarTriplet, n: u64) -> Result<f64> {
    ShiftSequences::new(t.clone())?.beta(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShiftType {
    I,
    II,
    III,
}

/// Dimension of the completion carried by the model map: 0, 1 or countably infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HatDim {
    Zero,
    One,
    Aleph0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypeLabel {
    pub kind: ShiftType,
    pub hat_dim: HatDim,
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {:?}", self.kind)
    }
}

/// Type I: `ν = 0, c = 0`; type II: `ν = θδ₀, c = 0`; type III otherwise.
pub fn classify_type(t: &ScalarTriplet) -> Result<TypeLabel> {
    ShiftSequences::new(t.clone())?;
    Ok(type_of(t))
}

pub(crate) fn type_of(t: &ScalarTriplet) -> TypeLabel {
    let kind = if t.c() != 0.0 {
        ShiftType::III
    } else if t.nu().is_zero() {
        ShiftType::I
    } else if t.nu().len() == 1 && t.nu().atoms()[0].0 == 0.0 {
        ShiftType::II
    } else {
        ShiftType::III
    };
    let hat_dim = match kind {
        ShiftType::I => HatDim::Zero,
        ShiftType::II => HatDim::One,
        ShiftType::III => HatDim::Aleph0,
    };
    TypeLabel { kind, hat_dim }
}

/// Diagonal entries at index `k` of the operator triplet `(B, C, F)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalTriplet {
    pub k: u64,
    pub b_k: f64,
    pub c_k: f64,
    pub nu_k: AtomicMeasure,
}

impl DiagonalTriplet {
    /// `b_k + ν_k(ℝ₊)`, the diagonal of `B + F(ℝ₊)`.
    pub fn drift(&self) -> f64 {
        self.b_k + self.nu_k.total_mass()
    }
}

pub fn diagonal_triplet(t: &ScalarTriplet, k: u64) -> Result<DiagonalTriplet> {
    let seq = ShiftSequences::new(t.clone())?;
    Ok(diagonal_triplet_of(&seq, k))
}

pub(crate) fn diagonal_triplet_of(seq: &ShiftSequences, k: u64) -> DiagonalTriplet {
    let t = seq.triplet();
    let log_g = seq.log_gamma(k);
    let g = seq.gamma(k);
    let atoms = t
        .nu()
        .atoms()
        .iter()
        .filter(|&&(x, _)| k == 0 || x > 0.0)
        .map(|&(x, w)| {
            let log_pow = if k == 0 { 0.0 } else { k as f64 * x.ln() };
            (x, w * (log_pow - log_g).exp())
        })
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let nu_k = AtomicMeasure::new(atoms).expect("reweighted atoms stay valid");
    DiagonalTriplet {
        k,
        b_k: (t.delta_gamma(k) - t.c()) / g,
        c_k: t.c() / g,
        nu_k,
    }
}
