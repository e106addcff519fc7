use adagrid::oracle::{Oracle, Staircase, Transform};
use adagrid::session::{Session, SessionRecord, SuggestResponse};
use adagrid::{StrategyKind, StrategySpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every intermediate session file, written to JSON and read back,
    /// replays to the same record and the same next suggestion.
    #[test]
    fn every_intermediate_record_replays(
        p in 1usize..=3,
        seed in any::<u64>(),
        kind in prop::sample::select(vec![StrategyKind::Ag, StrategyKind::Ai, StrategyKind::Gg, StrategyKind::Gi, StrategyKind::Amc]),
    ) {
        let f = Staircase::random(p, 5, seed).unwrap();
        let mut s = Session::create(Transform::identity(p), StrategySpec::new(kind, p, 20, seed), None).unwrap();
        loop {
            let text = serde_json::to_string(s.record()).unwrap();
            let back: SessionRecord = serde_json::from_str(&text).unwrap();
            let mut reloaded = Session::from_record(back).unwrap();
            prop_assert_eq!(serde_json::to_string(reloaded.record()).unwrap(), text);
            let next = s.suggest().unwrap();
            prop_assert_eq!(reloaded.suggest().unwrap(), next.clone());
            let SuggestResponse::Evaluate { unit, .. } = next else { break };
            s.record_outcome(f.evaluate(&unit).unwrap().as_i8()).unwrap();
        }
    }
}
