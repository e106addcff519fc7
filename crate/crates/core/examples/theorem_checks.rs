//! Runs the quick formula-versus-simulation checks and prints the bounds for
//! one setting. `cargo run --release --example theorem_checks -- --all`
//! runs every check.

use adagrid::theory::{bound_reports, checks};

fn main() -> adagrid::Result<()> {
    let all = std::env::args().any(|a| a == "--all");
    let names: Vec<&str> = if all {
        checks::CHECK_NAMES.to_vec()
    } else {
        vec!["si-identity", "sg-worst", "gi-count", "gg-bound", "table-constants", "illustration-ag"]
    };
    for name in names {
        let o = checks::run_check(name)?;
        println!("{} {:<17} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    println!("\nbounds for p = 3, n = 1000:");
    for r in bound_reports(3, 1000) {
        println!("  {:<28} {:?}", r.name, r.value);
    }
    Ok(())
}
