//! Quasi-affinity and similarity between two weighted shifts through the
//! ratio of their moment sequences, with the diagonal intertwiner.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cpd::{ScalarTriplet, ShiftSequences};
use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::subnormality::subnormal_unchecked;
use crate::verdict::{Citation, Outcome, Verdict};

pub const DEFAULT_RATIO_DEPTH: u64 = 512;
pub const SLOPE_THRESHOLD: f64 = 1e-3;
pub const INTERTWINER_TOL: f64 = 1e-12;
pub const SMALL_RATIO: f64 = 1e-6;
pub const RATIO_SCAN_CAP: u64 = 10_000_000;

/// Where the moment sequence `λ̂_n` of a shift comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentSource {
    Triplet(ScalarTriplet),
    /// `λ_0, λ_1, ...`; `λ̂_n = λ_0²···λ_{n-1}²`.
    Weights(Vec<f64>),
    /// Moments of a measure (normally the Berger measure).
    Berger(AtomicMeasure),
    /// `λ̂_0, λ̂_1, ...` given outright.
    Moments(Vec<f64>),
}

impl MomentSource {
    /// `ln λ̂_n` for `n = 0..=n_max`.
    pub fn log_moments(&self, n_max: u64) -> Result<Vec<f64>> {
        let len = n_max as usize + 1;
        match self {
            MomentSource::Triplet(t) => {
                let seq = ShiftSequences::new(t.clone())?;
                Ok((0..=n_max).map(|n| seq.log_gamma(n)).collect())
            }
            MomentSource::Weights(w) => {
                if w.len() < len - 1 {
                    return Err(Error::InsufficientData(format!(
                        "{} weights given, {} needed",
                        w.len(),
                        len - 1
                    )));
                }
                if let Some(bad) = w.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::Domain(format!("weight #{bad} is not positive")));
                }
                let mut out = Vec::with_capacity(len);
                let mut acc = 0.0;
                out.push(acc);
                for &x in &w[..len - 1] {
                    acc += 2.0 * x.ln();
                    out.push(acc);
                }
                Ok(out)
            }
            MomentSource::Berger(m) => {
                if m.is_zero() {
                    return Err(Error::ZeroMeasure);
                }
                let out: Vec<f64> = (0..=n_max).map(|n| m.log_moment(n)).collect();
                match out.iter().position(|x| !x.is_finite()) {
                    Some(n) => Err(Error::Domain(format!("moment {n} of the measure vanishes"))),
                    None => Ok(out),
                }
            }
            MomentSource::Moments(g) => {
                if g.len() < len {
                    return Err(Error::InsufficientData(format!(
                        "{} moments given, {len} needed",
                        g.len()
                    )));
                }
                if let Some(bad) = g[..len].iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::Domain(format!("moment #{bad} is not positive")));
                }
                Ok(g[..len].iter().map(|x| x.ln()).collect())
            }
        }
    }
}

/// Least-squares slope of `y` against its index over `[from, len)`.
fn tail_slope(y: &[f64], from: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (from..y.len()).map(|i| (i as f64, y[i])).collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn bounded_above(log_r: &[f64], criterion: &str, citation: Citation) -> Verdict {
    let n = log_r.len() - 1;
    let half = n / 2;
    let slope = tail_slope(log_r, half);
    let (argmax, sup) = log_r
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, x)| if x > a.1 { (i, x) } else { a });
    let head_max = log_r[..=half].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail_max = log_r[half..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outcome = if slope > SLOPE_THRESHOLD {
        Outcome::No
    } else if slope < -SLOPE_THRESHOLD || tail_max <= head_max + 1e-6 {
        Outcome::Yes
    } else {
        Outcome::Inconclusive
    };
    Verdict::new(criterion, outcome, citation)
        .with("slope", slope)
        .with("window_start", half)
        .with("window_end", n)
        .with("log_sup_ratio", sup)
        .with("sup_ratio", sup.exp())
        .with("argmax", argmax)
}

/// `W_λ` is a quasi-affine transform of `W_ω` iff `sup_n ω̂_n/λ̂_n < ∞`,
/// judged from the log-slope of the ratio over `[N/2, N]`.
pub fn quasi_affine_test(lam: &MomentSource, om: &MomentSource, n_max: u64) -> Result<Verdict> {
    let n_max = n_max.max(2);
    let l = lam.log_moments(n_max)?;
    let o = om.log_moments(n_max)?;
    let log_r: Vec<f64> = o.iter().zip(&l).map(|(a, b)| a - b).collect();
    Ok(bounded_above(&log_r, "quasi_affine", Citation::MomentRatioBound))
}

/// Similar iff `0 < inf ω̂_n/λ̂_n` and `sup ω̂_n/λ̂_n < ∞`.
pub fn similarity_test(lam: &MomentSource, om: &MomentSource, n_max: u64) -> Result<Verdict> {
    let up = quasi_affine_test(lam, om, n_max)?;
    let down = quasi_affine_test(om, lam, n_max)?;
    let outcome = match (up.outcome, down.outcome) {
        (Outcome::Yes, Outcome::Yes) => Outcome::Yes,
        (Outcome::No, _) | (_, Outcome::No) => Outcome::No,
        _ => Outcome::Inconclusive,
    };
    let inf = (-down.witness_f64("log_sup_ratio").unwrap_or(f64::NAN)).exp();
    Ok(Verdict::new("similarity", outcome, Citation::MomentRatioTwoSided)
        .with("sup_ratio", up.witnesses["sup_ratio"].clone())
        .with("inf_ratio", inf)
        .with("upper", up.outcome.to_string())
        .with("lower", down.outcome.to_string())
        .with("upper_slope", up.witnesses["slope"].clone())
        .with("lower_slope", down.witnesses["slope"].clone()))
}

/// Largest entry of `X·W_λ - W_ω·X` over the first `m` columns of the
/// `(m+1)×(m+1)` truncations, relative to the size of the two products.
pub fn intertwiner_residual(log_lam: &[f64], log_om: &[f64], x_diag: &[f64], m: usize) -> f64 {
    let size = m + 1;
    let w = |log_hat: &[f64]| {
        DMatrix::from_fn(size, size, |i, j| {
            if i == j + 1 {
                (0.5 * (log_hat[j + 1] - log_hat[j])).exp()
            } else {
                0.0
            }
        })
    };
    let wl = w(log_lam);
    let wo = w(log_om);
    let x = DMatrix::from_fn(size, size, |i, j| if i == j { x_diag[i] } else { 0.0 });
    let left = &x * &wl;
    let right = &wo * &x;
    let mut worst = 0.0f64;
    for j in 0..m {
        for i in 0..size {
            let scale = left[(i, j)].abs() + right[(i, j)].abs();
            if scale > 0.0 {
                worst = worst.max((left[(i, j)] - right[(i, j)]).abs() / scale);
            }
        }
    }
    worst
}

/// `X = diag(√(ω̂_n/λ̂_n))` intertwines the truncated shifts on every
/// column except the boundary one.
pub fn intertwiner_check(lam: &MomentSource, om: &MomentSource, m: usize) -> Result<Verdict> {
    let l = lam.log_moments(m as u64 + 1)?;
    let o = om.log_moments(m as u64 + 1)?;
    let x: Vec<f64> = o.iter().zip(&l).map(|(a, b)| (0.5 * (a - b)).exp()).collect();
    let worst = intertwiner_residual(&l, &o, &x, m);
    let outcome = if worst <= INTERTWINER_TOL { Outcome::Yes } else { Outcome::No };
    Ok(Verdict::new("intertwiner", outcome, Citation::MomentRatioBound)
        .with("size", m + 1)
        .with("max_relative_residual", worst))
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    /// First `n` with `γ_{n+1} - γ_n > 0`; from there `γ` grows at least linearly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_index: Option<u64>,
    /// First `n` with `ω̂_n/λ̂_n < SMALL_RATIO`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_ratio_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reverse: Option<Verdict>,
    pub verdict: Verdict,
}

/// A non-subnormal CPD shift against a subnormal shift with the given Berger
/// measure: with the measure on `[0, 1]`, `ω̂_n/λ̂_n → 0`; with
/// `1 < sup supp ν < inf supp μ`, `λ̂_n/ω̂_n → 0` instead.
pub fn contractive_domination(t: &ScalarTriplet, berger: &AtomicMeasure) -> Result<DominationReport> {
    let seq = ShiftSequences::new(t.clone())?;
    if subnormal_unchecked(t).verdict.outcome != Outcome::No {
        return Err(Error::Domain("the triplet must generate a non-subnormal shift".into()));
    }
    if berger.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let contractive = berger.sup_support().is_some_and(|s| s <= 1.0);
    let reverse = reverse_ratio(t, &seq, berger);
    if !contractive && reverse.is_none() {
        return Err(Error::Domain(
            "measure is neither supported in [0, 1] nor beyond sup supp nu > 1".into(),
        ));
    }

    let base = Verdict::new("contractive_domination", Outcome::Inconclusive, Citation::ContractiveDomination);
    if !contractive {
        let outcome = reverse.as_ref().map_or(Outcome::Inconclusive, |r| r.outcome);
        return Ok(DominationReport {
            growth_index: None,
            small_ratio_index: None,
            verdict: Verdict { outcome, ..base }.with("direction", "reverse"),
            reverse,
        });
    }

    let growth = first_true(crate::cpd::SEARCH_CAP, |n| t.delta_gamma(n) > 0.0);
    let log_r = |n: u64| berger.log_moment(n) - seq.log_gamma(n);
    let threshold = SMALL_RATIO.ln();
    // ω̂ is nonincreasing and γ increases past the growth index, so the ratio
    // is monotone there; before it, scan directly.
    let small = growth.and_then(|g| {
        (0..g.min(RATIO_SCAN_CAP))
            .find(|&n| log_r(n) < threshold)
            .or_else(|| first_true(RATIO_SCAN_CAP.max(g), |n| n >= g && log_r(n) < threshold))
    });
    let outcome = if growth.is_some() && small.is_some() {
        Outcome::Yes
    } else {
        Outcome::Inconclusive
    };
    let mut verdict = Verdict { outcome, ..base }.with("direction", "forward");
    if let Some(g) = growth {
        verdict = verdict.with("growth_index", g).with("growth_slope", t.delta_gamma(g));
    }
    if let Some(s) = small {
        verdict = verdict.with("small_ratio_index", s);
    }
    Ok(DominationReport {
        growth_index: growth,
        small_ratio_index: small,
        reverse,
        verdict,
    })
}

fn reverse_ratio(t: &ScalarTriplet, seq: &ShiftSequences, berger: &AtomicMeasure) -> Option<Verdict> {
    let theta2 = t.theta()?;
    let theta1 = berger.inf_support()?;
    if !(1.0 < theta2 && theta2 < theta1) {
        return None;
    }
    let n = DEFAULT_RATIO_DEPTH;
    let log_r: Vec<f64> = (0..=n).map(|k| seq.log_gamma(k) - berger.log_moment(k)).collect();
    let slope = tail_slope(&log_r, n as usize / 2);
    let bound = (theta2 / theta1).ln();
    let outcome = if slope < -SLOPE_THRESHOLD { Outcome::Yes } else { Outcome::Inconclusive };
    Some(
        Verdict::new("reverse_domination", outcome, Citation::ContractiveDomination)
            .with("theta_nu", theta2)
            .with("theta_berger", theta1)
            .with("slope", slope)
            .with("geometric_rate", bound)
            .with("log_ratio_at_end", log_r[n as usize]),
    )
}

/// Smallest `n ≤ cap` with `pred(n)`, for `pred` monotone in `n`.
fn first_true(cap: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if pred(0) {
        return Some(0);
    }
    let (mut lo, mut hi) = (0u64, 1u64);
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

#[cfg(test)]
mod tests {
    use super::*;

    fn trip(b: f64, c: f64, atoms: &[(f64, f64)]) -> MomentSource {
        MomentSource::Triplet(ScalarTriplet::from_parts(b, c, atoms).unwrap())
    }

    fn shift() -> MomentSource {
        MomentSource::Moments(vec![1.0; 1024])
    }

    #[test]
    fn quasi_affine_examples() {
        let v = quasi_affine_test(&trip(0.0, 0.0, &[(2.0, 1.0)]), &shift(), 512).unwrap();
        assert!(v.is_yes());
        let a = trip(0.3, 0.2, &[(0.5, 1.0)]);
        let v = quasi_affine_test(&a, &a, 512).unwrap();
        assert!(v.is_yes());
        assert_eq!(v.witness_f64("sup_ratio"), Some(1.0));
        let pow2 = MomentSource::Moments((0..600).map(|n| 2f64.powi(n)).collect());
        let v = quasi_affine_test(&shift(), &pow2, 512).unwrap();
        assert!(v.is_no());
        assert!((v.witness_f64("slope").unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn similarity_examples() {
        let a = 0.4;
        let wab = trip(a - 1.0, 0.0, &[(0.0, 1.0 - a)]);
        assert!(similarity_test(&wab, &shift(), 512).unwrap().is_yes());
        assert!(similarity_test(&trip(1.0, 0.0, &[]), &shift(), 512).unwrap().is_no());
        let s = trip(0.2, 0.0, &[(3.0, 0.4)]);
        assert!(similarity_test(&s, &s, 512).unwrap().is_yes());
    }

    #[test]
    fn weights_and_berger_sources() {
        let w = MomentSource::Weights(vec![0.5f64.sqrt(), 1.0, 1.0, 1.0]);
        let b = MomentSource::Berger(AtomicMeasure::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap());
        let lw = w.log_moments(4).unwrap();
        let lb = b.log_moments(4).unwrap();
        for (x, y) in lw.iter().zip(&lb) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(matches!(w.log_moments(5), Err(Error::InsufficientData(_))));
        let json = r#"{"weights": [1.0, 2.0]}"#;
        let parsed: MomentSource = serde_json::from_str(json).unwrap();
        assert_eq!(parsed, MomentSource::Weights(vec![1.0, 2.0]));
    }

    #[test]
    fn intertwiner_examples() {
        let a = trip(0.2, 0.1, &[(0.5, 0.3), (2.5, 0.2)]);
        let b = MomentSource::Berger(AtomicMeasure::new(vec![(0.25, 0.5), (1.0, 0.5)]).unwrap());
        assert!(intertwiner_check(&a, &b, 32).unwrap().is_yes());
        assert!(intertwiner_check(&a, &a, 32).unwrap().is_yes());
        let l = a.log_moments(33).unwrap();
        let o = b.log_moments(33).unwrap();
        let mut x: Vec<f64> = o.iter().zip(&l).map(|(p, q)| (0.5 * (p - q)).exp()).collect();
        x[5] *= 1.0 + 1e-3;
        assert!(intertwiner_residual(&l, &o, &x, 32) > 1e-4);
    }

    #[test]
    fn domination_examples() {
        let t = ScalarTriplet::from_parts(1.0, 0.0, &[]).unwrap();
        let mu = AtomicMeasure::dirac(1.0, 1.0).unwrap();
        let rep = contractive_domination(&t, &mu).unwrap();
        assert!(rep.verdict.is_yes());
        // ratio 1/(1+n) first drops below 1e-6 at n = 10^6
        assert_eq!(rep.small_ratio_index, Some(1_000_000));

        let t = ScalarTriplet::from_parts(0.0, 0.5, &[(0.5, 0.2)]).unwrap();
        let mu = AtomicMeasure::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!(contractive_domination(&t, &mu).unwrap().verdict.is_yes());

        let t = ScalarTriplet::from_parts(0.0, 0.0, &[(1.5, 1.0)]).unwrap();
        let mu = AtomicMeasure::dirac(2.0, 1.0).unwrap();
        let rep = contractive_domination(&t, &mu).unwrap();
        let rev = rep.reverse.unwrap();
        assert!(rev.is_yes());
        assert!((rev.witness_f64("slope").unwrap() - 0.75f64.ln()).abs() < 1e-6);

        let sub = ScalarTriplet::from_parts(0.0, 0.0, &[]).unwrap();
        assert!(contractive_domination(&sub, &AtomicMeasure::dirac(1.0, 1.0).unwrap()).is_err());
    }
}
