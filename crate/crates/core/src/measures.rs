//! Finitely atomic positive measures on the half-line `[0, ∞)`.
//!
//! Every measure in the crate (the Lévy–Khinchin measure of a triplet, the
//! Berger measure of a subnormal shift, the radial part of the model measure)
//! is a finite list of `(point, mass)` pairs, so all integrals are exact sums.

use serde::{Deserialize, Serialize};

use crate::cpd::q_poly;
use crate::error::{Error, Result};

/// Relative distance under which two points are treated as the same atom
/// after a pushforward.
pub const MERGE_REL_TOL: f64 = 1e-12;

/// A finite positive measure on `[0, ∞)` with finitely many atoms.
///
/// Atoms are kept sorted by point with pairwise distinct points and strictly
/// positive masses. The empty list is the zero measure.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<RawMeasure> for AtomicMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        AtomicMeasure::new(raw.atoms)
    }
}

/// `∫ 1/(x-1) dm` and `∫ 1/(x-1)^2 dm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolvent {
    /// `None` when the measure charges the point 1.
    pub i1: Option<f64>,
    /// `+∞` when the measure charges the point 1.
    pub i2: f64,
}

impl AtomicMeasure {
    /// Builds a measure from atoms given in strictly ascending order of point.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev: Option<f64> = None;
        for (index, &(point, mass)) in atoms.iter().enumerate() {
            let bad = |reason| Error::InvalidAtom {
                index,
                point,
                mass,
                reason,
            };
            if !point.is_finite() || !mass.is_finite() {
                return Err(bad("non-finite value"));
            }
            if point < 0.0 {
                return Err(bad("point must be nonnegative"));
            }
            if mass <= 0.0 {
                return Err(bad("mass must be strictly positive"));
            }
            if let Some(p) = prev {
                if point <= p {
                    return Err(bad("points must be strictly increasing"));
                }
            }
            prev = Some(point);
        }
        Ok(Self { atoms })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// A single atom `mass·δ_point`.
    pub fn dirac(point: f64, mass: f64) -> Result<Self> {
        Self::new(vec![(point, mass)])
    }

    /// Sorts arbitrary atoms, merges points that agree within `rel_tol`
    /// (relative) and drops zero masses.
    pub fn from_unsorted(mut atoms: Vec<(f64, f64)>, rel_tol: f64) -> Result<Self> {
        atoms.retain(|&(_, w)| w != 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if (x - last.0).abs() <= rel_tol * x.abs().max(last.0.abs()) => {
                    last.1 += w;
                }
                _ => merged.push((x, w)),
            }
        }
        Self::new(merged)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).sum()
    }

    /// Largest point of the support, `None` for the zero measure.
    pub fn sup_support(&self) -> Option<f64> {
        self.atoms.last().map(|&(x, _)| x)
    }

    pub fn inf_support(&self) -> Option<f64> {
        self.atoms.first().map(|&(x, _)| x)
    }

    /// Mass carried by exactly `point`.
    pub fn mass_at(&self, point: f64) -> f64 {
        self.atoms
            .iter()
            .find(|&&(x, _)| x == point)
            .map_or(0.0, |&(_, w)| w)
    }

    /// Restriction to the atoms whose point satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(f64) -> bool) -> Self {
        Self {
            atoms: self.atoms.iter().copied().filter(|&(x, _)| keep(x)).collect(),
        }
    }

    /// Measure with every mass multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(x, w)| (x, w * factor)).collect())
    }

    /// Sum of two measures, merging coinciding points exactly.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self::from_unsorted(atoms, 0.0)
    }

    /// `∫ x^n dm`, with `0^0 = 1`.
    pub fn moment(&self, n: u64) -> f64 {
        let n = n as f64;
        self.atoms.iter().map(|&(x, w)| w * x.powf(n)).sum()
    }

    /// `ln ∫ x^n dm` by log-sum-exp; `-∞` when the moment vanishes.
    pub fn log_moment(&self, n: u64) -> f64 {
        let n = n as f64;
        let logs: Vec<f64> = self
            .atoms
            .iter()
            .map(|&(x, w)| {
                if n == 0.0 {
                    w.ln()
                } else {
                    w.ln() + n * x.ln()
                }
            })
            .collect();
        log_sum_exp(&logs)
    }

    /// `∫ Q_n dm`.
    pub fn integrate_q(&self, n: u64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * q_poly(n, x)).sum()
    }

    /// `∫ 1/(x-1) dm` and `∫ 1/(x-1)^2 dm`, with sentinels when an atom sits at 1.
    pub fn resolvent_integrals(&self) -> Resolvent {
        if self.atoms.iter().any(|&(x, _)| x == 1.0) {
            return Resolvent {
                i1: None,
                i2: f64::INFINITY,
            };
        }
        let (i1, i2) = self.atoms.iter().fold((0.0, 0.0), |(s1, s2), &(x, w)| {
            let d = x - 1.0;
            (s1 + w / d, s2 + w / (d * d))
        });
        Resolvent { i1: Some(i1), i2 }
    }

    /// Image under `x ↦ √x`.
    pub fn pushforward_sqrt(&self) -> Self {
        Self::from_unsorted(
            self.atoms.iter().map(|&(x, w)| (x.sqrt(), w)).collect(),
            MERGE_REL_TOL,
        )
        .expect("sqrt of a valid measure is valid")
    }

    /// Image under `t ↦ t²`.
    pub fn pushforward_square(&self) -> Self {
        Self::from_unsorted(
            self.atoms.iter().map(|&(t, w)| (t * t, w)).collect(),
            MERGE_REL_TOL,
        )
        .expect("square of a valid measure is valid")
    }

    /// Probability measure proportional to `self`.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total_mass();
        if self.is_zero() || total <= 0.0 {
            return Err(Error::ZeroMeasure);
        }
        Ok(Self {
            atoms: self.atoms.iter().map(|&(x, w)| (x, w / total)).collect(),
        })
    }
}

pub(crate) fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + logs.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(atoms: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::new(atoms.to_vec()).unwrap()
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(AtomicMeasure::zero().total_mass(), 0.0);
        assert_eq!(m(&[(0.0, 0.5), (1.0, 0.5)]).total_mass(), 1.0);
        assert_eq!(m(&[(4.0, 3.0)]).total_mass(), 3.0);
    }

    #[test]
    fn moments_of_two_point_measure() {
        let a = 0.3;
        let mu = m(&[(0.0, 1.0 - a), (1.0, a)]);
        assert_eq!(mu.moment(0), 1.0);
        for n in 1..10 {
            assert_eq!(mu.moment(n), a);
        }
        assert_eq!(m(&[(2.0, 0.7)]).moment(3), 8.0 * 0.7);
        assert_eq!(AtomicMeasure::zero().moment(5), 0.0);
    }

    #[test]
    fn log_moment_matches_moment() {
        let mu = m(&[(0.0, 0.2), (0.5, 1.0), (3.0, 0.1)]);
        for n in 0..30 {
            let direct = mu.moment(n);
            assert!((mu.log_moment(n).exp() - direct).abs() <= 1e-13 * direct);
        }
        assert_eq!(AtomicMeasure::zero().log_moment(3), f64::NEG_INFINITY);
    }

    #[test]
    fn integrate_q_examples() {
        let mu = m(&[(0.3, 2.0), (4.0, 1.0)]);
        assert_eq!(mu.integrate_q(0), 0.0);
        assert_eq!(mu.integrate_q(1), 0.0);
        assert_eq!(m(&[(2.0, 1.0)]).integrate_q(3), 4.0);
        let theta = 0.7;
        assert!((m(&[(0.0, theta)]).integrate_q(5) - 4.0 * theta).abs() < 1e-15);
    }

    #[test]
    fn resolvent_examples() {
        let w = 0.6;
        let r = m(&[(4.0, w)]).resolvent_integrals();
        assert!((r.i1.unwrap() - w / 3.0).abs() < 1e-16);
        assert!((r.i2 - w / 9.0).abs() < 1e-16);
        let r = m(&[(0.0, 0.25)]).resolvent_integrals();
        assert_eq!(r.i1, Some(-0.25));
        assert_eq!(r.i2, 0.25);
        let r = m(&[(1.0, 0.5)]).resolvent_integrals();
        assert_eq!(r.i1, None);
        assert_eq!(r.i2, f64::INFINITY);
    }

    #[test]
    fn pushforwards() {
        assert_eq!(m(&[(4.0, 1.0)]).pushforward_sqrt(), m(&[(2.0, 1.0)]));
        let fixed = m(&[(0.0, 0.3), (1.0, 0.4)]);
        assert_eq!(fixed.pushforward_sqrt(), fixed);
        assert_eq!(m(&[(2.0, 1.0)]).pushforward_square(), m(&[(4.0, 1.0)]));
        assert_eq!(
            m(&[(0.25, 1.0), (0.5, 1.0)]).pushforward_square(),
            m(&[(0.0625, 1.0), (0.25, 1.0)])
        );
    }

    #[test]
    fn colliding_points_merge() {
        let x = 0.1 + 0.2;
        let merged = AtomicMeasure::from_unsorted(vec![(x, 1.0), (0.3, 2.0)], MERGE_REL_TOL).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged.total_mass(), 3.0);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(
            m(&[(0.0, 2.0), (3.0, 2.0)]).normalize().unwrap(),
            m(&[(0.0, 0.5), (3.0, 0.5)])
        );
        let p = m(&[(0.0, 0.25), (2.0, 0.75)]);
        assert_eq!(p.normalize().unwrap(), p);
        assert!(matches!(
            AtomicMeasure::zero().normalize(),
            Err(Error::ZeroMeasure)
        ));
    }

    #[test]
    fn parser_rejects_bad_atoms() {
        let err = serde_json::from_str::<AtomicMeasure>(r#"{"atoms": [[0.5, 1], [0.2, 1]]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("#1"), "{err}");
        assert!(serde_json::from_str::<AtomicMeasure>(r#"{"atoms": [[-1, 1]]}"#).is_err());
        assert!(serde_json::from_str::<AtomicMeasure>(r#"{"atoms": [[1, 0]]}"#).is_err());
        let ok: AtomicMeasure = serde_json::from_str(r#"{"atoms": [[0, 0.5], [2, 1.5]]}"#).unwrap();
        assert_eq!(ok.total_mass(), 2.0);
        assert_eq!(
            serde_json::to_string(&ok).unwrap(),
            r#"{"atoms":[[0.0,0.5],[2.0,1.5]]}"#
        );
    }
}
