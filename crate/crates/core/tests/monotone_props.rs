use adagrid::oracle::{Oracle, Staircase};
use adagrid::volume::{uncertain_volume_cells, uncertain_volume_mc};
use adagrid::{uncertain_volume, Certainty, DesignState, Label, LabeledPoint, UnitPoint};
use proptest::prelude::*;

/// Points on a coarse lattice so that ties and dominance are common.
fn lattice_point(p: usize) -> impl Strategy<Value = UnitPoint> {
    prop::collection::vec(0u8..=8, p).prop_map(|c| UnitPoint::new(c.into_iter().map(|v| v as f64 / 8.0).collect()).unwrap())
}

/// Consistent observations: labels from a random staircase.
fn observations() -> impl Strategy<Value = (usize, Vec<LabeledPoint>)> {
    (1usize..=3, any::<u64>()).prop_flat_map(|(p, seed)| {
        prop::collection::vec(lattice_point(p), 0..40).prop_map(move |pts| {
            let f = Staircase::random(p, 4, seed).unwrap();
            let mut seen = std::collections::HashSet::new();
            let obs = pts
                .into_iter()
                .filter(|x| seen.insert(x.clone()))
                .map(|x| {
                    let l = f.evaluate(&x).unwrap();
                    LabeledPoint::new(x, l)
                })
                .collect();
            (p, obs)
        })
    })
}

fn brute_classify(obs: &[LabeledPoint], q: &UnitPoint) -> Certainty {
    if obs.iter().any(|o| o.label == Label::Negative && q.leq(&o.point)) {
        Certainty::CertainNegative
    } else if obs.iter().any(|o| o.label == Label::Positive && o.point.leq(q)) {
        Certainty::CertainPositive
    } else {
        Certainty::Unknown
    }
}

fn sorted(mut v: Vec<UnitPoint>) -> Vec<UnitPoint> {
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn frontiers_are_minimal_and_classify_like_brute_force(
        (p, obs) in observations(),
        probes in prop::collection::vec(prop::collection::vec(0u8..=8, 3), 20),
    ) {
        let s = DesignState::from_observations(p, &obs).unwrap();
        let neg = s.negative_frontier();
        let pos = s.positive_frontier();
        for (i, a) in neg.iter().enumerate() {
            for (j, b) in neg.iter().enumerate() {
                prop_assert!(i == j || !a.leq(b));
            }
        }
        for (i, a) in pos.iter().enumerate() {
            for (j, b) in pos.iter().enumerate() {
                prop_assert!(i == j || !a.leq(b));
            }
        }
        // frontier points are observed and carry the right label
        for x in neg {
            prop_assert!(obs.iter().any(|o| &o.point == x && o.label == Label::Negative));
        }
        for x in pos {
            prop_assert!(obs.iter().any(|o| &o.point == x && o.label == Label::Positive));
        }
        for c in probes {
            let q = UnitPoint::new(c[..p].iter().map(|v| *v as f64 / 8.0).collect()).unwrap();
            prop_assert_eq!(s.classify(&q).unwrap(), brute_classify(&obs, &q));
        }
    }

    #[test]
    fn frontiers_do_not_depend_on_insertion_order((p, obs) in observations(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = obs.clone();
        shuffled.shuffle(&mut adagrid::rng::seeded(seed));
        let a = DesignState::from_observations(p, &obs).unwrap();
        let b = DesignState::from_observations(p, &shuffled).unwrap();
        prop_assert_eq!(sorted(a.negative_frontier().to_vec()), sorted(b.negative_frontier().to_vec()));
        prop_assert_eq!(sorted(a.positive_frontier().to_vec()), sorted(b.positive_frontier().to_vec()));
        prop_assert_eq!(uncertain_volume(&a).unwrap().v_uncertain, uncertain_volume(&b).unwrap().v_uncertain);
    }

    #[test]
    fn exact_cell_and_monte_carlo_volumes_agree((p, obs) in observations(), seed in any::<u64>()) {
        let s = DesignState::from_observations(p, &obs).unwrap();
        let exact = uncertain_volume(&s).unwrap();
        prop_assert!((exact.v_negative + exact.v_positive + exact.v_uncertain - 1.0).abs() < 1e-12);
        // every observation sits on the 1/8 lattice, so level-3 cells are exact
        let cells = uncertain_volume_cells(&s, 3).unwrap();
        prop_assert!((cells.v_uncertain - exact.v_uncertain).abs() < 1e-12);
        let mc = uncertain_volume_mc(&s, 20_000, seed).unwrap();
        let se = mc.mc_stderr.unwrap().max(1e-3);
        prop_assert!((mc.v_uncertain - exact.v_uncertain).abs() <= 5.0 * se);
    }

    #[test]
    fn uncertain_volume_never_grows((p, obs) in observations()) {
        let mut s = DesignState::new(p).unwrap();
        let mut last = 1.0;
        for o in obs {
            s.record(o).unwrap();
            let v = uncertain_volume(&s).unwrap().v_uncertain;
            prop_assert!(v <= last + 1e-12);
            last = v;
        }
    }
}

#[test]
fn contradicting_observation_is_rejected() {
    let mut s = DesignState::new(2).unwrap();
    s.record(LabeledPoint::new(UnitPoint::new(vec![0.6, 0.6]).unwrap(), Label::Negative)).unwrap();
    let bad = LabeledPoint::new(UnitPoint::new(vec![0.5, 0.4]).unwrap(), Label::Positive);
    assert!(matches!(s.record(bad), Err(adagrid::Error::NonMonotone(_))));
    assert_eq!(s.evaluated().len(), 1);
}
