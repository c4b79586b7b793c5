//! Property-based invariants of the region algebra, group actions and
//! coverage reporting.

use jcr::apps::{jcr_from_confidence, jcr_from_prediction, TrioRegion};
use jcr::harness::clopper_pearson;
use jcr::invariance::{GroupAction, GroupKind};
use jcr::region::{empirical_quantile, Axis, BandRegion, GridRegion, IntervalUnion};
use proptest::prelude::*;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 1..60)
}

fn intervals() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec((-50f64..50.0, 0f64..10.0), 0..6)
        .prop_map(|v| IntervalUnion::from_intervals(v.into_iter().map(|(a, w)| (a, a + w)).collect()))
}

fn region() -> impl Strategy<Value = GridRegion> {
    (2usize..20, 2usize..20, -5f64..0.0, 0.5f64..5.0).prop_flat_map(|(nt, ny, lo, hi)| {
        prop::collection::vec(any::<bool>(), nt * ny).prop_map(move |mask| {
            let t = Axis::new(lo, hi, nt).unwrap();
            let y = Axis::new(2.0 * lo, 2.0 * hi, ny).unwrap();
            GridRegion::new(t, y, mask).unwrap()
        })
    })
}

fn kind() -> impl Strategy<Value = GroupKind> {
    prop_oneof![
        Just(GroupKind::Permutation),
        Just(GroupKind::CyclicShift),
        Just(GroupKind::SignFlip),
        Just(GroupKind::Orthogonal),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_monotone_in_level(v in values(), a in 0f64..1.0, b in 0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(empirical_quantile(&v, lo).unwrap() <= empirical_quantile(&v, hi).unwrap());
    }

    #[test]
    fn quantile_is_a_sample_value_or_minus_infinity(v in values(), a in 0f64..1.0) {
        let q = empirical_quantile(&v, a).unwrap();
        prop_assert!(q == f64::NEG_INFINITY || v.contains(&q));
    }

    #[test]
    fn interval_ops_agree_with_membership(a in intervals(), b in intervals(), x in -60f64..60.0) {
        prop_assert_eq!(a.union(&b).contains(x), a.contains(x) || b.contains(x));
        prop_assert_eq!(a.intersect(&b).contains(x), a.contains(x) && b.contains(x));
        let m = a.union(&b).measure() + a.intersect(&b).measure();
        prop_assert!((m - a.measure() - b.measure()).abs() < 1e-9);
    }

    #[test]
    fn interval_pieces_stay_sorted_and_disjoint(a in intervals(), b in intervals()) {
        for u in [a.union(&b), a.intersect(&b)] {
            for w in u.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
        }
    }

    #[test]
    fn group_identity_and_composition(kind in kind(), d in 2usize..7, seed in any::<u64>(), v in prop::collection::vec(-10f64..10.0, 7)) {
        let g = GroupAction::new(kind, d, seed).unwrap();
        let v = &v[..d];
        let e = g.sample_elements(2);
        let id = g.identity();
        prop_assert_eq!(id.apply(v), v.to_vec());
        let ab = e[0].compose(&e[1]).unwrap().apply(v);
        let sequential = e[0].apply(&e[1].apply(v));
        for (p, q) in ab.iter().zip(&sequential) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn group_actions_preserve_the_norm(kind in kind(), d in 2usize..7, seed in any::<u64>(), v in prop::collection::vec(-10f64..10.0, 7)) {
        let g = GroupAction::new(kind, d, seed).unwrap();
        let v = &v[..d];
        let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
        for e in g.sample_elements(3) {
            prop_assert!((norm(&e.apply(v)) - norm(v)).abs() < 1e-9 * norm(v).max(1.0));
        }
    }

    #[test]
    fn grid_region_csv_and_json_round_trip(r in region()) {
        prop_assert_eq!(GridRegion::from_csv_str(&r.to_csv_string()).unwrap(), r.clone());
        prop_assert_eq!(GridRegion::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn trio_round_trip(r in region()) {
        let (t, y) = (*r.theta_grid(), *r.y_grid());
        let trio = TrioRegion::new(r.clone());
        prop_assert_eq!(&jcr_from_confidence(t, y, |z| trio.confidence(z)).unwrap(), &r);
        prop_assert_eq!(&jcr_from_prediction(t, y, |th| trio.prediction(th)).unwrap(), &r);
    }

    #[test]
    fn band_sections_match_membership(
        slope in -3f64..3.0, intercept in -2f64..2.0, lo in -3f64..0.0, w in 0f64..4.0,
        theta in -5f64..5.0, y in -20f64..20.0,
    ) {
        let b = BandRegion::new(slope, intercept, lo, lo + w).unwrap();
        let inside = b.contains(theta, y);
        // Sections are closed; only compare away from the boundary.
        let r = b.residual(theta, y);
        if (r - lo).abs() > 1e-9 && (r - lo - w).abs() > 1e-9 {
            prop_assert_eq!(b.section_y(theta).contains(y), inside);
            prop_assert_eq!(b.section_theta(y).contains(theta), inside);
        }
    }

    #[test]
    fn clopper_pearson_brackets_the_rate(trials in 1u64..5000, frac in 0f64..=1.0, conf in 0.5f64..0.999) {
        let hits = ((trials as f64) * frac).round() as u64;
        let (lo, hi) = clopper_pearson(hits, trials, conf).unwrap();
        let rate = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= rate + 1e-12);
        prop_assert!(rate <= hi + 1e-12 && hi <= 1.0);
    }
}
