use adagrid::rng::seeded;
use adagrid::svc::{dual_objective, Classifier, SvcModel};
use adagrid::{Label, LabeledPoint, UnitPoint};
use proptest::prelude::*;
use rand::Rng;

/// Distinct random points labelled by a monotone rule, kept away from the
/// boundary so the set is comfortably separable.
fn separable(p: usize, n: usize, seed: u64) -> Vec<LabeledPoint> {
    let mut rng = seeded(seed);
    let level = 0.5 * p as f64;
    let mut out = Vec::new();
    while out.len() < n {
        let x: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = x.iter().sum::<f64>() - level;
        if s.abs() < 0.05 {
            continue;
        }
        out.push(LabeledPoint::new(UnitPoint::new(x).unwrap(), Label::from_sign(s)));
    }
    if out.iter().all(|d| d.label == out[0].label) {
        let flip = out[0].label.flip();
        out[0].label = flip;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fitted_models_are_feasible_and_fit_the_training_set(
        p in 1usize..=3,
        n in 2usize..=40,
        seed in any::<u64>(),
        gamma in prop::sample::select(vec![1.0, 4.0, 16.0]),
    ) {
        let data = separable(p, n, seed);
        if data.iter().all(|d| d.label == data[0].label) {
            return Ok(());
        }
        let m = SvcModel::fit(&data, gamma).unwrap();
        prop_assert!(m.alphas.iter().all(|a| *a >= 0.0));
        let scale = m.alphas.iter().cloned().fold(1.0, f64::max);
        prop_assert!(m.equality_residual().abs() <= 1e-8 * scale);
        prop_assert!((m.recompute_bias() - m.bias).abs() <= 1e-10 * scale);
        if m.converged {
            for d in &data {
                prop_assert_eq!(m.predict(&d.point), d.label);
            }
        }
    }

    #[test]
    fn tuned_classifier_has_perfect_training_accuracy(p in 1usize..=3, n in 10usize..=60, seed in any::<u64>()) {
        let data = separable(p, n, seed);
        if let Classifier::Svc { model } = Classifier::train(&data, seed).unwrap() {
            for d in &data {
                prop_assert_eq!(model.predict(&d.point), d.label);
            }
        }
    }
}

/// Feasible moves around the optimum never lower the dual objective.
#[test]
fn solution_is_a_local_minimum_of_the_dual() {
    let data = separable(2, 30, 7);
    let gamma = 8.0;
    let m = SvcModel::fit(&data, gamma).unwrap();
    assert!(m.converged);
    let best = m.dual_objective();
    let y: Vec<f64> = data.iter().map(|d| d.label.as_i8() as f64).collect();
    let mut rng = seeded(99);
    let scale = m.alphas.iter().cloned().fold(1.0, f64::max);
    for _ in 0..500 {
        let i = rng.gen_range(0..data.len());
        let j = loop {
            let j = rng.gen_range(0..data.len());
            if j != i {
                break j;
            }
        };
        let t = rng.gen_range(-1.0..1.0) * 1e-3 * scale;
        let mut a = m.alphas.clone();
        // keeps Σ α y fixed
        a[i] += t * y[i];
        a[j] -= t * y[j];
        if a[i] < 0.0 || a[j] < 0.0 {
            continue;
        }
        let v = dual_objective(&data, gamma, &a);
        assert!(v >= best - 1e-9 * best.abs().max(1.0), "move ({i},{j},{t}) lowered {best} to {v}");
    }
}

#[test]
fn too_few_of_a_class_falls_back_to_the_majority() {
    let mut data = separable(2, 30, 3);
    let mut kept_pos = 0;
    data.retain(|d| {
        if d.label == Label::Positive {
            kept_pos += 1;
            kept_pos <= 4
        } else {
            true
        }
    });
    assert_eq!(Classifier::train(&data, 0).unwrap(), Classifier::Majority { label: Label::Negative });
}
