//! Three-valued results shared by every decision procedure.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Yes,
    No,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Yes => "yes",
            Outcome::No => "no",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// The result that justifies an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Citation {
    /// Positivity of `1 + bn + cn² + ∫Q_n dν` (convexity plus the limit table).
    SequencePositivity,
    /// Types I/II/III by `(c, supp ν)`.
    TypeClassification,
    /// Subnormality from `∫(x-1)^-2 dν ≤ 1`, `b = ∫(x-1)^-1 dν`, `c = 0`.
    TripletSubnormality,
    /// Positive semidefinite Hankel matrices of the moment sequence.
    HankelMoments,
    /// Quadratic growth term must vanish when `supp ν ⊆ [0,1]`.
    NecessaryNoQuadratic,
    /// `B + F(ℝ₊) ≤ 0` when `supp ν ⊆ [0,1]`.
    NecessaryNonPositiveDrift,
    /// `B + F(ℝ₊) = 0` or `supp ν ⊄ {0}`.
    NecessaryZeroDriftOrSpread,
    /// `B ≱ 0` or no mass of `ν` inside `(0,1)`.
    NecessaryIndefiniteOrNoInterior,
    /// Types I and II are either subnormal or not similar to a subnormal operator.
    TypeDichotomy,
    /// `inf β_n > 0` gives a bounded inverse of the model intertwiner.
    DefectFloor,
    /// Atom of `ν` at `sup supp ν > 1`.
    EndpointAtom,
    /// Mass near the right endpoint does not decay faster than `(1 - ε_n/ϑ)^n`.
    EndpointMass,
    /// Weights squared eventually confined to a band above 1.
    WeightBand,
    /// Inequalities between `b`, `c`, `ν(ℝ₊)` and the support endpoints.
    TripletInequalities,
    /// `⟨B₂ W^n e₀, W^n e₀⟩ = ∫ x^n d(ν + 2cδ₁)`.
    ModelIdentity,
    /// Quasi-affinity of shifts via `sup ω̂_n/λ̂_n < ∞`.
    MomentRatioBound,
    /// Similarity of shifts via two-sided bounds on `ω̂_n/λ̂_n`.
    MomentRatioTwoSided,
    /// Non-subnormal CPD shifts dominate every contractive subnormal shift.
    ContractiveDomination,
}

impl Citation {
    pub fn tag(self) -> &'static str {
        match self {
            Citation::SequencePositivity => "sequence-positivity",
            Citation::TypeClassification => "type-classification",
            Citation::TripletSubnormality => "triplet-subnormality",
            Citation::HankelMoments => "hankel-moments",
            Citation::NecessaryNoQuadratic => "necessary-no-quadratic",
            Citation::NecessaryNonPositiveDrift => "necessary-non-positive-drift",
            Citation::NecessaryZeroDriftOrSpread => "necessary-zero-drift-or-spread",
            Citation::NecessaryIndefiniteOrNoInterior => "necessary-indefinite-or-no-interior",
            Citation::TypeDichotomy => "type-dichotomy",
            Citation::DefectFloor => "defect-floor",
            Citation::EndpointAtom => "endpoint-atom",
            Citation::EndpointMass => "endpoint-mass",
            Citation::WeightBand => "weight-band",
            Citation::TripletInequalities => "triplet-inequalities",
            Citation::ModelIdentity => "model-identity",
            Citation::MomentRatioBound => "moment-ratio-bound",
            Citation::MomentRatioTwoSided => "moment-ratio-two-sided",
            Citation::ContractiveDomination => "contractive-domination",
        }
    }
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Outcome of a decision procedure together with the numbers that back it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub criterion: String,
    pub outcome: Outcome,
    pub witnesses: BTreeMap<String, Value>,
    pub citation: Citation,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(criterion: impl Into<String>, outcome: Outcome, citation: Citation) -> Self {
        Self {
            criterion: criterion.into(),
            outcome,
            witnesses: BTreeMap::new(),
            citation,
            notes: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.witnesses.insert(key.to_string(), value.into());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn is_yes(&self) -> bool {
        self.outcome == Outcome::Yes
    }

    pub fn is_no(&self) -> bool {
        self.outcome == Outcome::No
    }

    pub fn witness_f64(&self, key: &str) -> Option<f64> {
        self.witnesses.get(key).and_then(Value::as_f64)
    }
}
