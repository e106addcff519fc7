//! All six sequential strategies on one arctan contour, with the uncertain
//! volume after every 10 evaluations.

use adagrid::oracle::{arctan_mu_range, ArctanContour};
use adagrid::strategy::state_from_trace;
use adagrid::{run_strategy, uncertain_volume, StrategyKind, StrategySpec};

fn main() -> adagrid::Result<()> {
    let (lo, hi) = arctan_mu_range(2).expect("calibrated for p = 2");
    let f = ArctanContour::new(2, 0.5 * (lo + hi))?;
    let budget = 60;
    let checkpoints: Vec<usize> = (10..=budget).step_by(10).collect();
    print!("strategy");
    for n in &checkpoints {
        print!("{n:>9}");
    }
    println!();
    for kind in StrategyKind::ALL {
        let trace = run_strategy(&StrategySpec::new(kind, 2, budget, 11), &f)?;
        print!("{:<8}", kind.name());
        for &n in &checkpoints {
            let s = state_from_trace(2, &trace[..n.min(trace.len())])?;
            print!("{:>9.5}", uncertain_volume(&s)?.v_uncertain);
        }
        let skipped: u64 = trace.iter().map(|r| r.skipped_since_last).sum();
        println!("   ({} runs, {skipped} skipped)", trace.len());
    }
    Ok(())
}
