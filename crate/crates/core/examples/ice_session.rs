//! A 29-run human-in-the-loop campaign on the ice-breaking input space.
//! The "simulator" here is a closed-form stand-in answered in physical units;
//! the session file is reloaded after every answer, as a restarted
//! process would.

use adagrid::oracle::{PhysicalModel, Transform};
use adagrid::session::{SessionStore, SliceRequest, SuggestResponse};
use adagrid::{StrategyKind, StrategySpec};

fn main() -> adagrid::Result<()> {
    let dir = std::env::temp_dir().join("adagrid-ice-session");
    let store = SessionStore::open(&dir)?;
    let model = PhysicalModel::ImpactEnergy { threshold: 20.0 };
    let spec = StrategySpec::new(StrategyKind::Ag, 3, 29, 0);
    let id = store.create(Transform::ice_breaking(), spec, Some("ice".into()))?.id().to_string();

    loop {
        let mut s = store.load(&id)?;
        let suggestion = s.suggest()?;
        store.save(&s)?;
        let SuggestResponse::Evaluate { index, physical, .. } = suggestion else {
            println!("complete: {suggestion:?}");
            break;
        };
        let values: Vec<f64> = physical.iter().map(|c| c.value).collect();
        let label = model.evaluate(&values)?;
        let mut s = store.load(&id)?;
        let out = s.record_outcome(label.as_i8())?;
        store.save(&s)?;
        let shown: Vec<String> = physical.iter().map(|c| format!("{} {}", c.value, c.unit)).collect();
        println!("run {index:>2}: {:<28} -> {:>+2}   v = {:.4}", shown.join(", "), label.as_i8(), out.volume.v_uncertain);
    }

    let s = store.load(&id)?;
    // one slice per lawful-looking modulus value, as in a gallery of cuts
    for e in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let report = s.report(Some(&SliceRequest {
            dims: (0, 1),
            grid: 16,
            fixed: Some(vec![0.0, 0.0, e]),
        }))?;
        let slice = report.slice.expect("slice requested");
        println!("\nmodulus axis at {e}: uncertain fraction {:.3}", slice.uncertain_fraction);
        for row in slice.cells.iter().rev() {
            let line: String = row
                .iter()
                .map(|c| match c {
                    -1 => '-',
                    1 => '+',
                    _ => '.',
                })
                .collect();
            println!("  {line}");
        }
    }
    println!("\nsession file: {}", dir.join(format!("{id}.json")).display());
    Ok(())
}
