//! AG against the two-dimensional illustration function, next to the static
//! grid that carries the same information.
//!
//! ```text
//! cargo run --example illustration_walkthrough
//! ```

use adagrid::oracle::{Illustration, Oracle};
use adagrid::static_designs::{StaticDesignSpec, StaticKind};
use adagrid::{uncertain_volume, DesignState, Designer, LabeledPoint, StrategyKind, StrategySpec};

fn main() -> adagrid::Result<()> {
    let f = Illustration;
    let mut d = Designer::for_oracle(StrategySpec::new(StrategyKind::Ag, 2, 16, 0), &f)?;
    println!("run  point          label  level  v_uncertain");
    while let Some(r) = d.step(&f)? {
        let v = uncertain_volume(d.state())?.v_uncertain;
        println!(
            "{:>3}  ({:.4}, {:.4})  {:>+3}  {:>5}  {v:.6}",
            r.index,
            r.point.coords()[0],
            r.point.coords()[1],
            r.label.as_i8(),
            r.level_at_step,
        );
    }

    // the 81-run static grid knows exactly as much as the 16-run AG
    let sg = StaticDesignSpec { kind: StaticKind::Sg, dimension: 2, n: 81, seed: 0 }.generate()?;
    let obs: Vec<LabeledPoint> = sg
        .into_iter()
        .map(|x| Ok(LabeledPoint::new(x.clone(), f.evaluate(&x)?)))
        .collect::<adagrid::Result<_>>()?;
    let sg_state = DesignState::from_observations(2, &obs)?;
    println!(
        "\nSG with 81 runs: v = {}; AG with 16 runs: v = {}",
        uncertain_volume(&sg_state)?.v_uncertain,
        uncertain_volume(d.state())?.v_uncertain
    );
    Ok(())
}
