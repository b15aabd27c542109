//! The two-parameter family `W_{a,b}` and generators of triplets satisfying
//! each family of the triplet inequalities.

use serde::{Deserialize, Serialize};

use crate::cpd::{type_of, ScalarTriplet, TypeLabel};
use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::similarity::{criterion_inequalities, IneqFamily, IneqParams};
use crate::verdict::Outcome;

fn check_ab(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a = {a} must be positive")));
    }
    if !(b >= 1.0 && b.is_finite()) {
        return Err(Error::Domain(format!("b = {b} must be at least 1")));
    }
    Ok(())
}

/// `λ_0 = √a`, `λ_n = √((1 + n(b-1)) / (1 + (n-1)(b-1)))`.
pub fn wab_weights(a: f64, b: f64, n: u64) -> Result<f64> {
    check_ab(a, b)?;
    if n == 0 {
        return Ok(a.sqrt());
    }
    let nf = n as f64;
    Ok(((1.0 + nf * (b - 1.0)) / (1.0 + (nf - 1.0) * (b - 1.0))).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WabClass {
    pub a: f64,
    pub b: f64,
    /// `1 - 2a + ab`.
    pub theta: f64,
    pub cpd: bool,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub type_label: Option<TypeLabel>,
    pub subnormal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub berger: Option<AtomicMeasure>,
    /// `(a - 1, 0, θδ₀)`, present when the shift is CPD.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triplet: Option<ScalarTriplet>,
}

/// CPD iff `θ = 1 - 2a + ab ≥ 0`; type I iff `θ = 0`, type II iff `θ > 0`;
/// subnormal iff `a ≤ b = 1`, with Berger measure `(1-a)δ₀ + aδ₁`.
pub fn wab_classify(a: f64, b: f64) -> Result<WabClass> {
    check_ab(a, b)?;
    let raw = 1.0 - 2.0 * a + a * b;
    // θ = 0 exactly for the type I boundary, up to the rounding of its terms
    let theta = if raw.abs() <= 4.0 * f64::EPSILON * (1.0 + 2.0 * a + a * b) {
        0.0
    } else {
        raw
    };
    let cpd = theta >= 0.0;
    let triplet = if cpd {
        let nu = if theta > 0.0 {
            AtomicMeasure::dirac(0.0, theta)?
        } else {
            AtomicMeasure::zero()
        };
        Some(ScalarTriplet::new(a - 1.0, 0.0, nu)?)
    } else {
        None
    };
    let subnormal = a <= 1.0 && b == 1.0;
    let berger = if subnormal {
        let atoms = if a < 1.0 { vec![(0.0, 1.0 - a), (1.0, a)] } else { vec![(1.0, 1.0)] };
        Some(AtomicMeasure::new(atoms)?)
    } else {
        None
    };
    Ok(WabClass {
        a,
        b,
        theta,
        cpd,
        type_label: triplet.as_ref().map(type_of),
        subnormal,
        berger,
        triplet,
    })
}

/// The positive root of `1 - 2t - 3t²/2 = 0`, i.e. `(√10 - 2)/3`.
pub fn example_t0() -> f64 {
    (10f64.sqrt() - 2.0) / 3.0
}

/// Parameters for a triplet satisfying one inequality family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum ExampleCase {
    /// `b, c ≥ 0` with `b + c ≥ 1`.
    First { b: f64, c: f64 },
    /// `b, c ≥ 0` and `t ∈ (0, t₀)`.
    Second { b: f64, c: f64, t: f64 },
    /// `τ ∈ (2/3, 1)`, `t ∈ (4/3, 2τ)`; `θ`, `α` default to window midpoints.
    Third {
        tau: f64,
        t: f64,
        theta: Option<f64>,
        alpha: Option<f64>,
        positive_c: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedExample {
    pub triplet: ScalarTriplet,
    pub family: IneqFamily,
    pub params: IneqParams,
}

fn window(name: &str, lo: f64, hi: f64, x: f64, open_lo: bool) -> Result<()> {
    let above = if open_lo { x > lo } else { x >= lo };
    if above && x < hi {
        Ok(())
    } else {
        Err(Error::EmptyWindow(format!("{name} = {x} outside ({lo}, {hi})")))
    }
}

/// Spreads `mass` over `atoms` equally spaced points in `[lo, hi]`.
fn spread(lo: f64, hi: f64, mass: f64, atoms: usize) -> Result<AtomicMeasure> {
    let k = atoms.max(1);
    if k == 1 || hi <= lo {
        return AtomicMeasure::dirac(lo, mass);
    }
    let pts = (0..k)
        .map(|i| (lo + (hi - lo) * i as f64 / (k - 1) as f64, mass / k as f64))
        .collect();
    AtomicMeasure::new(pts)
}

/// Builds a triplet following the recipe for the requested family and
/// confirms it with [`criterion_inequalities`]. `atoms > 1` spreads `ν`
/// over several points with the same total mass and support bounds.
pub fn generate_example(case: ExampleCase, atoms: usize) -> Result<GeneratedExample> {
    let margin = 1.0 + 1e-9;
    let (triplet, family, params) = match case {
        ExampleCase::First { b, c } => {
            if b < 0.0 || c < 0.0 || b + c < 1.0 {
                return Err(Error::EmptyWindow(format!("need b, c >= 0 and b + c >= 1, got ({b}, {c})")));
            }
            let alpha = if c < 1.0 {
                let need = (b - 2.0 * c) / (1.0 - c);
                if need > 1.0 {
                    need * margin
                } else {
                    1.0
                }
            } else if (c == 1.0 && b <= 2.0 * c) || (c > 1.0 && b <= c + 1.0) {
                1.0
            } else {
                return Err(Error::EmptyWindow(format!("no alpha >= 1 with 2c + alpha(1-c) >= b for ({b}, {c})")));
            };
            let inf = 2.0 * (1.0 + c);
            let nu = spread(inf, inf + 1.0, alpha, atoms)?;
            (ScalarTriplet::new(b, c, nu)?, IneqFamily::I, IneqParams::default())
        }
        ExampleCase::Second { b, c, t } => {
            if b < 0.0 || c < 0.0 {
                return Err(Error::EmptyWindow(format!("need b, c >= 0, got ({b}, {c})")));
            }
            window("t", 0.0, example_t0(), t, true)?;
            let q = 1.0 - 2.0 * t - 1.5 * t * t;
            let alpha0 = [
                (1.0 - b - c) / (t * (1.0 + t)),
                (b - 2.0 * c) / q,
                2.0 * c / (t * (2.0 + t)),
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
            let alpha = if alpha0 > 0.0 { alpha0 * margin } else { 1.0 };
            let inf = 2.0 + t;
            let nu = spread(inf, inf + 1.0, alpha, atoms)?;
            let params = IneqParams { t: Some(t), tau: None };
            (ScalarTriplet::new(b, c, nu)?, IneqFamily::II, params)
        }
        ExampleCase::Third { tau, t, theta, alpha, positive_c } => {
            window("tau", 2.0 / 3.0, 1.0, tau, true)?;
            window("t", 4.0 / 3.0, 2.0 * tau, t, true)?;
            let j1 = (1.0 + tau / (1.0 - t / 2.0), 1.0 / (1.0 - tau));
            let theta = theta.unwrap_or(0.5 * (j1.0 + j1.1));
            window("theta", j1.0, j1.1, theta, true)?;
            let j2 = (2.0 * tau * tau / (2.0 - t), (theta - 1.0) * tau);
            let alpha = alpha.unwrap_or(0.5 * (j2.0 + j2.1));
            window("alpha", j2.0, j2.1, alpha, true)?;
            let b = tau;
            let c = if positive_c {
                let strict = |c: f64| {
                    theta - 1.0 > b + c
                        && b + c > tau
                        && 2.0 * c + alpha * (1.0 - t / 2.0) > tau * b
                        && alpha * t > 2.0 * tau * c
                        && 2.0 * c + alpha < (theta - 1.0) * b
                        && (1.0 - tau) * theta < 1.0
                };
                let (mut lo, mut hi) = (0.0, theta);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if strict(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if lo <= 0.0 {
                    return Err(Error::EmptyWindow("no positive c keeps the inequalities strict".into()));
                }
                0.5 * lo
            } else {
                0.0
            };
            let inf = 1.0 + tau + t;
            let nu = if atoms > 1 { spread(inf, theta, alpha, atoms)? } else { AtomicMeasure::dirac(theta, alpha)? };
            let params = IneqParams { t: Some(t), tau: Some(tau) };
            (ScalarTriplet::new(b, c, nu)?, IneqFamily::III, params)
        }
    };
    let v = criterion_inequalities(&triplet, params)?;
    let holds = v.outcome == Outcome::Yes
        && v.witnesses["families"]
            .as_array()
            .is_some_and(|f| f.iter().any(|x| *x == serde_json::to_value(family).expect("family")));
    if !holds {
        return Err(Error::EmptyWindow(format!("generated triplet {triplet} fails family {family:?}")));
    }
    Ok(GeneratedExample { triplet, family, params })
}
