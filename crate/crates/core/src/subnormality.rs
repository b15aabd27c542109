//! Subnormality of CPD shifts, Berger measures, a Hankel-matrix oracle and
//! the necessary conditions for similarity to a subnormal operator.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::cpd::{diagonal_triplet_of, type_of, ScalarTriplet, ShiftSequences, ShiftType};
use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::verdict::{Citation, Outcome, Verdict};

/// Absolute tolerance for `b = ∫(x-1)^-1 dν` and for `∫(x-1)^-2 dν ≤ 1`.
pub const SUBNORMAL_TOL: f64 = 1e-12;
/// Mismatches of `b` below this are reported as inconclusive rather than `no`.
pub const NEAR_MISS: f64 = 1e-6;
pub const DEFAULT_HANKEL_ORDER: usize = 8;
pub const DEFAULT_HANKEL_TOL: f64 = 1e-8;
/// Eigenvalues in `[-BAND·tol·‖H‖, -tol·‖H‖)` are neither accepted nor rejected.
pub const HANKEL_BAND: f64 = 100.0;
pub const DEFAULT_NECESSARY_DEPTH: u64 = 64;

#[derive(Debug, Clone, Serialize)]
pub struct SubnormalReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub berger: Option<AtomicMeasure>,
}

/// Subnormal iff `∫(x-1)^-2 dν ≤ 1`, `b = ∫(x-1)^-1 dν` and `c = 0`; the
/// Berger measure is then `(1 - I2)δ₁ + Σ w/(x-1)² δ_x`.
pub fn is_subnormal(t: &ScalarTriplet) -> Result<SubnormalReport> {
    ShiftSequences::new(t.clone())?;
    Ok(subnormal_unchecked(t))
}

pub(crate) fn subnormal_unchecked(t: &ScalarTriplet) -> SubnormalReport {
    let r = t.nu().resolvent_integrals();
    let i1 = r.i1.expect("validated triplets have no atom at 1");
    let i2 = r.i2;
    let gap = t.b() - i1;
    let v = Verdict::new("is_subnormal", Outcome::Yes, Citation::TripletSubnormality)
        .with("i1", i1)
        .with("i2", i2)
        .with("b_minus_i1", gap)
        .with("c", t.c());
    let fail = |v: Verdict, why: &str| SubnormalReport {
        verdict: Verdict { outcome: Outcome::No, ..v }.note(why),
        berger: None,
    };
    if t.c() != 0.0 {
        return fail(v, "c > 0");
    }
    if i2 > 1.0 + SUBNORMAL_TOL {
        return fail(v, "integral of (x-1)^-2 exceeds 1");
    }
    if gap.abs() > NEAR_MISS {
        return fail(v, "b differs from the integral of (x-1)^-1");
    }
    if gap.abs() > SUBNORMAL_TOL {
        return SubnormalReport {
            verdict: Verdict { outcome: Outcome::Inconclusive, ..v }
                .note("b within the near-miss band of the integral of (x-1)^-1"),
            berger: None,
        };
    }
    let mut atoms: Vec<(f64, f64)> = t
        .nu()
        .atoms()
        .iter()
        .map(|&(x, w)| (x, w / ((x - 1.0) * (x - 1.0))))
        .collect();
    if 1.0 - i2 > 0.0 {
        atoms.push((1.0, 1.0 - i2));
    }
    let berger = AtomicMeasure::from_unsorted(atoms, 0.0).expect("berger atoms are valid");
    SubnormalReport {
        verdict: v,
        berger: Some(berger),
    }
}

/// Positive semidefiniteness of `[γ_{i+j}]` and `[γ_{i+j+1}]`, `i, j ≤ order`.
///
/// Both matrices are first scaled by `diag(H)^{-1/2}` on each side, which
/// keeps the inertia and removes the geometric growth of the moments.
pub fn hankel_psd_oracle(moments: &[f64], order: usize, tol: f64) -> Result<Verdict> {
    let need = 2 * order + 2;
    if moments.len() < need {
        return Err(Error::InsufficientData(format!(
            "Hankel order {order} needs {need} moments, got {}",
            moments.len()
        )));
    }
    let h = hankel_margin(moments, order, 0);
    let hs = hankel_margin(moments, order, 1);
    let worst = h.min(hs);
    let outcome = if worst >= -tol {
        Outcome::Yes
    } else if worst < -HANKEL_BAND * tol {
        Outcome::No
    } else {
        Outcome::Inconclusive
    };
    Ok(Verdict::new("hankel_psd", outcome, Citation::HankelMoments)
        .with("order", order)
        .with("tol", tol)
        .with("min_relative_eigenvalue", h)
        .with("min_relative_eigenvalue_shifted", hs))
}

/// Smallest eigenvalue of the scaled Hankel matrix over its `∞`-norm.
fn hankel_margin(moments: &[f64], order: usize, shift: usize) -> f64 {
    let size = order + 1;
    let scale: Vec<f64> = (0..size)
        .map(|i| {
            let d = moments[2 * i + shift];
            if d > 0.0 {
                d.sqrt().recip()
            } else {
                1.0
            }
        })
        .collect();
    let m = DMatrix::from_fn(size, size, |i, j| moments[i + j + shift] * scale[i] * scale[j]);
    let norm = m
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if norm == 0.0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(m);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min) / norm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionStatus {
    pub id: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_index: Option<u64>,
    pub citation: Citation,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryReport {
    pub applicable: bool,
    pub verified_up_to: u64,
    pub conditions: Vec<ConditionStatus>,
    pub verdict: Verdict,
}

impl NecessaryReport {
    pub fn first_failure(&self) -> Option<&ConditionStatus> {
        self.conditions.iter().find(|c| c.status == Status::Fail)
    }
}

/// Conditions (i)-(iv) on the diagonal triplets `(b_k, c_k, ν_k)`, `k ≤ depth`;
/// applicable when `supp ν ⊆ [0, 1]`. A failure certifies that the shift is
/// not similar to a subnormal operator.
pub fn necessary_conditions(t: &ScalarTriplet, depth: u64) -> Result<NecessaryReport> {
    let seq = ShiftSequences::new(t.clone())?;
    let applicable = t.theta().is_none_or(|th| th <= 1.0);
    let ids = ["i", "ii", "iii", "iv"];
    let cites = [
        Citation::NecessaryNoQuadratic,
        Citation::NecessaryNonPositiveDrift,
        Citation::NecessaryZeroDriftOrSpread,
        Citation::NecessaryIndefiniteOrNoInterior,
    ];
    if !applicable {
        let conditions = ids
            .iter()
            .zip(cites)
            .map(|(&id, citation)| ConditionStatus {
                id,
                status: Status::NotApplicable,
                witness_index: None,
                citation,
            })
            .collect();
        let verdict = Verdict::new(
            "necessary_conditions",
            Outcome::Inconclusive,
            Citation::NecessaryNoQuadratic,
        )
        .note("not applicable: supp nu is not contained in [0, 1]");
        return Ok(NecessaryReport {
            applicable,
            verified_up_to: 0,
            conditions,
            verdict,
        });
    }

    let diag: Vec<_> = (0..=depth).map(|k| diagonal_triplet_of(&seq, k)).collect();
    let tol = |x: f64| 1e-12 * (1.0 + x.abs());

    let first_positive_drift = diag
        .iter()
        .find(|d| d.drift() > tol(d.b_k) + tol(d.nu_k.total_mass()))
        .map(|d| d.k);
    let first_nonzero_drift = diag
        .iter()
        .find(|d| d.drift().abs() > tol(d.b_k) + tol(d.nu_k.total_mass()))
        .map(|d| d.k);
    let first_negative_b = diag.iter().find(|d| d.b_k < -tol(d.b_k)).map(|d| d.k);
    let spread = t.nu().atoms().iter().any(|&(x, _)| x > 0.0);
    let interior = t.nu().atoms().iter().any(|&(x, _)| x > 0.0 && x < 1.0);

    let status = |ok: bool| if ok { Status::Pass } else { Status::Fail };
    let conditions = vec![
        ConditionStatus {
            id: "i",
            status: status(t.c() == 0.0),
            witness_index: None,
            citation: cites[0],
        },
        ConditionStatus {
            id: "ii",
            status: status(first_positive_drift.is_none()),
            witness_index: first_positive_drift,
            citation: cites[1],
        },
        ConditionStatus {
            id: "iii",
            status: status(first_nonzero_drift.is_none() || spread),
            witness_index: if spread { None } else { first_nonzero_drift },
            citation: cites[2],
        },
        ConditionStatus {
            id: "iv",
            status: status(first_negative_b.is_some() || !interior),
            witness_index: first_negative_b,
            citation: cites[3],
        },
    ];
    let verdict = match conditions.iter().find(|c| c.status == Status::Fail) {
        Some(c) => {
            let mut v = Verdict::new("necessary_conditions", Outcome::No, c.citation)
                .with("failed", c.id);
            if let Some(k) = c.witness_index {
                v = v.with("witness_index", k);
            }
            v
        }
        None => Verdict::new(
            "necessary_conditions",
            Outcome::Inconclusive,
            Citation::NecessaryNoQuadratic,
        )
        .note(format!("all conditions hold for k <= {depth}")),
    };
    Ok(NecessaryReport {
        applicable,
        verified_up_to: depth,
        conditions,
        verdict,
    })
}

/// For types I and II: `yes` when subnormal, `no` when not similar to any
/// subnormal operator.
pub fn dichotomy_check(t: &ScalarTriplet) -> Result<Verdict> {
    ShiftSequences::new(t.clone())?;
    let label = type_of(t);
    if label.kind == ShiftType::III {
        return Err(Error::WrongType("dichotomy applies only to types I/II".into()));
    }
    let sub = subnormal_unchecked(t).verdict;
    let class = match sub.outcome {
        Outcome::Yes => "subnormal",
        Outcome::No => "not-similar-to-subnormal",
        Outcome::Inconclusive => "undecided",
    };
    Ok(Verdict::new("dichotomy", sub.outcome, Citation::TypeDichotomy)
        .with("class", class)
        .with("type", format!("{:?}", label.kind)))
}
