//! The four static designs, their comparable-pair counts, and the
//! closed-form volumes of the grids.

use adagrid::count_comparable_pairs;
use adagrid::static_designs::{StaticDesignSpec, StaticKind};
use adagrid::theory::{sg_worst_volume, si_volume, static_lower_bound};

fn main() -> adagrid::Result<()> {
    let n = 81;
    println!("p = 2, n = {n}: comparable pairs out of {}", n * (n - 1) / 2);
    for kind in [StaticKind::Sg, StaticKind::Si, StaticKind::Mc, StaticKind::Lhd] {
        let pts = StaticDesignSpec { kind, dimension: 2, n, seed: 7 }.generate()?;
        println!("  {kind:?}: {}", count_comparable_pairs(&pts));
    }

    println!("\nworst-case uncertain volume");
    println!("   p      n        SG        SI   any static");
    for (p, n) in [(1, 9), (2, 9), (2, 81), (3, 27), (3, 1000)] {
        println!(
            "  {p:>2} {n:>6} {:>9.5} {:>9.5} {:>12}",
            sg_worst_volume(p, n)?,
            si_volume(p, n)?,
            static_lower_bound(p, n).value().map_or("n/a".to_string(), |v| format!("{v:.5}"))
        );
    }

    let lhd = StaticDesignSpec { kind: StaticKind::Lhd, dimension: 3, n: 5, seed: 1 }.generate()?;
    println!("\na 5-run Latin hypercube in 3 dimensions:");
    for x in lhd {
        println!("  {:?}", x.coords());
    }
    Ok(())
}
