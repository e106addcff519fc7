use adagrid::oracle::{Oracle, Staircase};
use adagrid::static_designs::gen_sg;
use adagrid::strategy::{state_from_trace, Suggestion};
use adagrid::theory::checks::evaluate_design;
use adagrid::{run_strategy, uncertain_volume, Designer, StrategyKind, StrategySpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Adaptive strategies only ever evaluate points whose label is unknown.
    #[test]
    fn adaptive_strategies_waste_no_runs(
        p in 1usize..=3,
        seed in any::<u64>(),
        kind in prop::sample::select(vec![StrategyKind::Ag, StrategyKind::Ai, StrategyKind::Amc]),
    ) {
        let f = Staircase::random(p, 5, seed).unwrap();
        let mut d = Designer::for_oracle(StrategySpec::new(kind, p, 40, seed), &f).unwrap();
        while let Suggestion::Evaluate { point } = d.suggest().unwrap() {
            prop_assert!(d.state().classify(&point).unwrap().is_unknown());
            d.record(f.evaluate(&point).unwrap()).unwrap();
        }
    }

    /// Once a full-grid strategy has finished level `l` it knows exactly what
    /// evaluating the whole `(2^l + 1)^p` static grid would have told it.
    #[test]
    fn finished_levels_match_the_static_grid(
        p in 1usize..=3,
        seed in any::<u64>(),
        kind in prop::sample::select(vec![StrategyKind::Gg, StrategyKind::Ag]),
    ) {
        let f = Staircase::random(p, 6, seed).unwrap();
        let top = if p == 3 { 2 } else { 3 };
        let budget = (1usize << top) + 1;
        let trace = run_strategy(&StrategySpec::new(kind, p, budget.pow(p as u32), seed), &f).unwrap();
        for l in 0..top {
            let done = trace.iter().take_while(|r| r.level_at_step <= l).count();
            let reached_next = done < trace.len();
            if !reached_next {
                continue;
            }
            let adaptive = uncertain_volume(&state_from_trace(p, &trace[..done]).unwrap()).unwrap();
            let m = (1usize << l) + 1;
            let sg = evaluate_design(&gen_sg(p, m.pow(p as u32)).unwrap(), &f).unwrap();
            prop_assert!((adaptive.v_uncertain - uncertain_volume(&sg).unwrap().v_uncertain).abs() < 1e-12);
        }
    }

    #[test]
    fn traces_are_reproducible(p in 1usize..=2, seed in any::<u64>(), kind in prop::sample::select(StrategyKind::ALL.to_vec())) {
        let f = Staircase::random(p, 4, seed).unwrap();
        let budget = if kind == StrategyKind::Ale { 25 } else { 30 };
        let spec = StrategySpec::new(kind, p, budget, seed);
        prop_assert_eq!(run_strategy(&spec, &f).unwrap(), run_strategy(&spec, &f).unwrap());
    }
}

#[test]
fn random_strategies_depend_on_the_seed() {
    let f = Staircase::random(2, 8, 5).unwrap();
    for kind in [StrategyKind::Amc, StrategyKind::Ale] {
        let a = run_strategy(&StrategySpec::new(kind, 2, 25, 1), &f).unwrap();
        let b = run_strategy(&StrategySpec::new(kind, 2, 25, 2), &f).unwrap();
        assert_ne!(a, b, "{kind}");
    }
}

#[test]
fn every_strategy_stops_at_its_budget() {
    let f = Staircase::random(2, 8, 3).unwrap();
    for kind in StrategyKind::ALL {
        let trace = run_strategy(&StrategySpec::new(kind, 2, 23, 0), &f).unwrap();
        assert!(trace.len() <= 23, "{kind}");
        assert!(trace.iter().enumerate().all(|(i, r)| r.index == i + 1));
    }
}
