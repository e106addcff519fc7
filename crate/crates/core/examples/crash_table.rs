//! A finite lattice of precomputed outcomes: the 67 x 15 crash table, read
//! through the full-grid and inner-grid piecewise maps.

use std::path::Path;

use adagrid::oracle::{Oracle, Table, TabularOracle, Transform};
use adagrid::strategy::Completion;
use adagrid::{uncertain_volume, Designer, StrategyKind, StrategySpec};

fn main() -> adagrid::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let table = Table::read_csv(data.join("crash_synthetic.csv"))?;
    println!("{} rows, columns {:?}", table.rows.len(), table.columns);

    for (kind, transform) in [
        (StrategyKind::Gg, Transform::crash_full_grid()),
        (StrategyKind::Ag, Transform::crash_full_grid()),
        (StrategyKind::Gi, Transform::crash_inner_grid()),
        (StrategyKind::Ai, Transform::crash_inner_grid()),
    ] {
        let f = TabularOracle::new(table.clone(), transform.clone())?;
        let mut d = Designer::for_oracle(StrategySpec::new(kind, 2, 1005, 1), &f)?;
        let done = d.run(&f)?;
        let last = d.history().last().map(|r| transform.apply(&r.point)).transpose()?;
        println!(
            "{:<3} {:>4} of {} cells evaluated, {:?}, v = {:.4}, last run at {:?}",
            kind.name(),
            d.history().len(),
            f.domain().and_then(|d| d.size()).unwrap_or(0),
            done,
            uncertain_volume(d.state())?.v_uncertain,
            last
        );
        assert_eq!(done, Completion::Certified);
    }
    Ok(())
}
