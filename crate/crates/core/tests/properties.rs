mod common;

use common::gamma_oracle;
use cpdshift::cpd::{classify_type, q_poly, validate_triplet, ScalarTriplet, ShiftSequences, ShiftType};
use cpdshift::measures::AtomicMeasure;
use cpdshift::quasiaffine::{intertwiner_check, quasi_affine_test, similarity_test, MomentSource};
use cpdshift::verdict::Outcome;
use proptest::prelude::*;

fn atoms(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..5.0, 0.05f64..2.0), 0..=max).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
        v.retain(|a| (a.0 - 1.0).abs() > 1e-3);
        v
    })
}

fn measure() -> impl Strategy<Value = AtomicMeasure> {
    atoms(5).prop_map(|a| AtomicMeasure::new(a).unwrap())
}

fn triplet() -> impl Strategy<Value = ScalarTriplet> {
    (-1.0f64..3.0, prop_oneof![Just(0.0), 0.0f64..2.0], atoms(4)).prop_filter_map(
        "validated triplets only",
        |(b, c, a)| {
            let t = ScalarTriplet::from_parts(b, c, &a).ok()?;
            (validate_triplet(&t).outcome == Outcome::Yes).then_some(t)
        },
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn normalize_has_unit_mass(m in measure()) {
        prop_assume!(!m.is_zero());
        let n = m.normalize().unwrap();
        prop_assert!(close(n.total_mass(), 1.0, 1e-14));
        prop_assert!(close(n.moment(0), 1.0, 1e-14));
    }

    #[test]
    fn square_undoes_sqrt(m in measure()) {
        let back = m.pushforward_sqrt().pushforward_square();
        prop_assert_eq!(back.len(), m.len());
        for (p, q) in back.atoms().iter().zip(m.atoms()) {
            prop_assert!(close(p.0, q.0, 1e-15));
            prop_assert_eq!(p.1, q.1);
        }
    }

    #[test]
    fn sum_adds_moments(a in measure(), b in measure(), n in 0u64..20) {
        let s = a.add(&b).unwrap();
        prop_assert!(close(s.moment(n), a.moment(n) + b.moment(n), 1e-12));
    }

    #[test]
    fn json_round_trip(t in triplet()) {
        let text = serde_json::to_string(&t).unwrap();
        let back: ScalarTriplet = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn q_recurrence(n in 1u64..300, x in 0.0f64..3.0) {
        let lhs = q_poly(n + 1, x);
        let rhs = x * q_poly(n, x) + n as f64;
        prop_assert!(close(lhs, rhs, 1e-11), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn gamma_matches_direct_sum(t in triplet(), n in 0u64..40) {
        let seq = ShiftSequences::new(t.clone()).unwrap();
        let direct = gamma_oracle(t.b(), t.c(), t.nu().atoms(), n);
        prop_assert!(close(seq.gamma(n), direct, 1e-11), "{} vs {}", seq.gamma(n), direct);
    }

    #[test]
    fn second_difference(t in triplet(), n in 0u64..60) {
        let seq = ShiftSequences::new(t.clone()).unwrap();
        let d2 = seq.gamma(n + 2) - 2.0 * seq.gamma(n + 1) + seq.gamma(n);
        let expected = 2.0 * t.c() + t.nu().moment(n);
        prop_assert!(close(d2, expected, 1e-9 * (1.0 + seq.gamma(n + 2) / expected.max(1.0))),
            "{} vs {}", d2, expected);
    }

    #[test]
    fn beta_times_gamma(t in triplet(), n in 0u64..64) {
        let seq = ShiftSequences::new(t.clone()).unwrap();
        let lhs = seq.beta(n).unwrap() * seq.gamma(n);
        prop_assert!(close(lhs, 2.0 * t.c() + t.nu().moment(n), 1e-9));
    }

    #[test]
    fn beta_all_positive_or_all_zero(t in triplet()) {
        let seq = ShiftSequences::new(t.clone()).unwrap();
        let pos: Vec<bool> = (1..=64).map(|n| seq.beta(n).unwrap() > 0.0).collect();
        prop_assert!(pos.iter().all(|&p| p) || pos.iter().all(|&p| !p));
        let kind = classify_type(&t).unwrap().kind;
        prop_assert_eq!(kind == ShiftType::III, pos[0]);
    }

    #[test]
    fn validation_matches_positivity_scan(
        b in -2.0f64..1.0,
        c in prop_oneof![Just(0.0), 0.0f64..0.5],
        a in atoms(3),
    ) {
        let t = ScalarTriplet::from_parts(b, c, &a).unwrap();
        let v = validate_triplet(&t);
        let scan_ok = (0..2000).all(|n| gamma_oracle(b, c, &a, n) > 0.0);
        match v.outcome {
            Outcome::Yes => prop_assert!(scan_ok),
            Outcome::No => {
                let k = v.witness_f64("witness_index");
                prop_assert!(k.is_some());
                let k = k.unwrap() as u64;
                prop_assert!(k > 2000 || gamma_oracle(b, c, &a, k) <= 1e-9);
            }
            Outcome::Inconclusive => {}
        }
    }

    #[test]
    fn similarity_is_symmetric(s in triplet(), t in triplet()) {
        let a = MomentSource::Triplet(s);
        let b = MomentSource::Triplet(t);
        let ab = similarity_test(&a, &b, 256).unwrap().outcome;
        let ba = similarity_test(&b, &a, 256).unwrap().outcome;
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn quasi_affine_reflexive(t in triplet()) {
        let a = MomentSource::Triplet(t);
        prop_assert!(quasi_affine_test(&a, &a, 256).unwrap().is_yes());
    }

    #[test]
    fn diagonal_intertwiner(s in triplet(), t in triplet()) {
        let v = intertwiner_check(&MomentSource::Triplet(s), &MomentSource::Triplet(t), 32).unwrap();
        prop_assert!(v.is_yes());
    }
}
