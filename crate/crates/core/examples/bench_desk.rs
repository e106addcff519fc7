//! A small benchmark: four strategies on ten arctan contours, written as CSV
//! plus a sidecar, then summarised.

use adagrid::bench::{emit_results, mean_accuracies, mean_volumes, run_plan, DesignKind, ExperimentPlan, OracleFamily};

fn main() -> adagrid::Result<()> {
    let plan = ExperimentPlan {
        name: "desk".into(),
        oracle: OracleFamily::Arctan { p: 2, draws: 10, mu_range: None },
        strategies: [DesignKind::Mc, DesignKind::Sg, DesignKind::Amc, DesignKind::Ag, DesignKind::Ai]
            .into_iter()
            .map(Into::into)
            .collect(),
        budgets: vec![9, 16, 25, 36, 49],
        test_points: 5_000,
        master_seed: 42,
        parallelism: 1,
        classifier: true,
        full: None,
    };
    let out = run_plan(&plan)?;
    let path = std::env::temp_dir().join("adagrid-bench-desk.csv");
    let meta = emit_results(&out, &plan, &path)?;
    println!("{} rows -> {} (hash {})", meta.rows, path.display(), &meta.determinism_hash[..16]);

    let v = mean_volumes(&out.rows);
    let acc = mean_accuracies(&out.rows);
    println!("\nstrategy  n    mean v    mean accuracy");
    for ((s, n), mv) in &v {
        let a = acc.get(&(s.clone(), *n)).copied().unwrap_or(f64::NAN);
        println!("{s:<8} {n:>3}  {mv:.5}   {a:.4}");
    }
    Ok(())
}
