//! Fits the Gaussian-kernel SVC to an AG design and compares its accuracy
//! with the dominance-plus-classifier hybrid.

use adagrid::bench::{accuracy_eval, HybridPredictor};
use adagrid::oracle::ArctanContour;
use adagrid::strategy::state_from_trace;
use adagrid::svc::Classifier;
use adagrid::{run_strategy, LabeledPoint, StrategyKind, StrategySpec, UnitPoint};

fn main() -> adagrid::Result<()> {
    let f = ArctanContour::new(2, 1.5)?;
    for n in [16, 32, 64] {
        let trace = run_strategy(&StrategySpec::new(StrategyKind::Ag, 2, n, 3), &f)?;
        let data: Vec<LabeledPoint> = trace
            .iter()
            .map(|r| LabeledPoint::new(r.point.clone(), r.label))
            .collect();
        let c = Classifier::train(&data, 5)?;
        let acc = accuracy_eval(&|x| c.predict(x), &f, 20_000, 9)?;
        let state = state_from_trace(2, &trace)?;
        let hybrid = HybridPredictor { state: &state, classifier: &c };
        let hacc = accuracy_eval(&|x| hybrid.predict(x), &f, 20_000, 9)?;
        println!(
            "n = {n:>3}: gamma = {:<8} accuracy {acc:.4}  hybrid {hacc:.4}",
            c.gamma().map_or("majority".into(), |g| format!("{g:.3}"))
        );
        if let Classifier::Svc { mut model } = c {
            model.calibrate(&data)?;
            let centre = UnitPoint::new(vec![0.5, 0.5])?;
            println!(
                "          P(+1 | centre) = {:.3}, {} support vectors",
                model.probability(centre.coords()).unwrap_or(f64::NAN),
                model.alphas.iter().filter(|a| **a > 0.0).count()
            );
        }
    }
    Ok(())
}
