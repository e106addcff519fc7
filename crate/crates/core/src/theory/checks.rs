//! Simulation checks of the closed forms against the implementation.
//!
//! Each check is deterministic (fixed seeds) and returns a
//! [`CheckOutcome`] rather than panicking, so the CLI and the acceptance
//! runner can report all of them.

use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::error::{Error, Result};
use crate::monotone::{count_comparable_pairs, DesignState, Label, LabeledPoint, UnitPoint};
use crate::oracle::{HalfSpace, Illustration, Oracle, Staircase, UpperFace};
use crate::rng::{derive_seed, seeded};
use crate::static_designs::{gen_lhd, gen_mc, gen_sg, gen_si};
use crate::strategy::{amc_evaluations, Completion, Designer, StrategyKind, StrategySpec};
use crate::volume::uncertain_volume;

pub const CHECK_NAMES: [&str; 10] = [
    "si-identity",
    "sg-worst",
    "gi-count",
    "gg-bound",
    "mc-p1",
    "amc-p1",
    "rate-floor",
    "table-constants",
    "comparable-pairs",
    "illustration-ag",
];

const MASTER: u64 = 0x5EED_CAFE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u64,
}

pub fn run_check(name: &str) -> Result<CheckOutcome> {
    let start = Instant::now();
    let (passed, detail) = match name {
        "si-identity" => si_identity()?,
        "sg-worst" => sg_worst()?,
        "gi-count" => gi_count()?,
        "gg-bound" => gg_bound()?,
        "mc-p1" => mc_p1()?,
        "amc-p1" => amc_p1()?,
        "rate-floor" => rate_floor()?,
        "table-constants" => table_constants(),
        "comparable-pairs" => comparable_pairs()?,
        "illustration-ag" => illustration_ag()?,
        other => {
            return Err(Error::usage(format!(
                "unknown check `{other}`; available: {}",
                CHECK_NAMES.join(", ")
            )))
        }
    };
    Ok(CheckOutcome {
        name: name.into(),
        passed,
        detail,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

pub fn run_all() -> Result<Vec<CheckOutcome>> {
    CHECK_NAMES.iter().map(|n| run_check(n)).collect()
}

/// Evaluates every point of a static design.
pub fn evaluate_design(points: &[UnitPoint], oracle: &dyn Oracle) -> Result<DesignState> {
    let mut state = DesignState::new(oracle.dimension())?;
    for x in points {
        state.record(LabeledPoint::new(x.clone(), oracle.evaluate(x)?))?;
    }
    Ok(state)
}

fn staircase(p: usize, index: u64) -> Result<Staircase> {
    let seed = derive_seed(MASTER, p as u64, index);
    Staircase::random(p, 2 + (seed % 8) as usize, seed)
}

fn si_identity() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in 1..=3usize {
        for m in 1..=5usize {
            let n = m.pow(p as u32);
            let design = gen_si(p, n)?;
            let expected = si_volume(p, n as u64)?;
            for k in 0..50 {
                let f = staircase(p, k)?;
                let v = uncertain_volume(&evaluate_design(&design, &f)?)?.v_uncertain;
                worst = worst.max((v - expected).abs());
                cases += 1;
            }
        }
    }
    Ok((worst <= 1e-12, format!("{cases} oracles, max |v - formula| = {worst:.3e}")))
}

fn sg_worst() -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in 1..=3usize {
        for m in 2..=5usize {
            let n = m.pow(p as u32);
            let design = gen_sg(p, n)?;
            let bound = sg_worst_volume(p, n as u64)?;
            let attained = uncertain_volume(&evaluate_design(&design, &UpperFace::new(p)?)?)?.v_uncertain;
            if (attained - bound).abs() > 1e-12 {
                ok = false;
                notes.push(format!("p={p} n={n}: worst-case oracle gives {attained}, formula {bound}"));
            }
            for k in 0..200 {
                let v = uncertain_volume(&evaluate_design(&design, &staircase(p, k)?)?)?.v_uncertain;
                if v > bound + 1e-12 {
                    ok = false;
                    notes.push(format!("p={p} n={n}: staircase {k} exceeds bound ({v} > {bound})"));
                }
            }
        }
    }
    let detail = if ok {
        "attained exactly by the upper-face oracle; 2400 staircases within bound".into()
    } else {
        notes.join("; ")
    };
    Ok((ok, detail))
}

/// Evaluations made at levels `<= g`, and whether level `g` was finished.
fn count_through_level(kind: StrategyKind, f: &dyn Oracle, g: u32, budget: usize, seed: u64) -> Result<(usize, bool)> {
    let p = f.dimension();
    let mut d = Designer::for_oracle(StrategySpec::new(kind, p, budget, seed), f)?;
    let completion = d.run(f)?;
    let count = d.history().iter().filter(|r| r.level_at_step <= g).count();
    let finished = d.history().iter().any(|r| r.level_at_step > g) || completion == Completion::Certified;
    Ok((count, finished))
}

fn gi_count() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    for p in 1..=3usize {
        for g in 1..=3u32 {
            let expected = gi_count_exact(p, g) as usize;
            for k in 0..200 {
                let f = staircase(p, k)?;
                let (count, finished) = count_through_level(StrategyKind::Gi, &f, g, expected + 1, k)?;
                if count != expected || !finished {
                    failures.push(format!("p={p} g={g} oracle {k}: {count} != {expected}"));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "1800 runs match the closed form".into()
        } else {
            failures.into_iter().take(5).collect::<Vec<_>>().join("; ")
        },
    ))
}

fn gg_bound() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let mut tightest = 0.0f64;
    for p in 1..=3usize {
        for g in 1..=3u32 {
            let bound = gg_count_bound(p, g) as usize;
            for k in 0..200 {
                let f = staircase(p, k)?;
                let (count, finished) = count_through_level(StrategyKind::Gg, &f, g, bound + 1, k)?;
                tightest = tightest.max(count as f64 / bound as f64);
                if count > bound || !finished {
                    failures.push(format!("p={p} g={g} oracle {k}: {count} > {bound}"));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("1800 runs within bound; largest count/bound = {tightest:.3}")
        } else {
            failures.into_iter().take(5).collect::<Vec<_>>().join("; ")
        },
    ))
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo in one dimension on the half-space step function.
pub fn mc_p1_mean(n: usize, replicates: u64) -> Result<(f64, f64)> {
    let f = HalfSpace::new(1)?;
    let vols = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let design = gen_mc(1, n, derive_seed(MASTER, 100 + n as u64, r))?;
            Ok(uncertain_volume(&evaluate_design(&design, &f)?)?.v_uncertain)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_se(&vols))
}

fn mc_p1() -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [1usize, 5, 10, 20] {
        let (mean, se) = mc_p1_mean(n, 100_000)?;
        let expected = mc_worst_expected_volume_p1(n as u64);
        let z = (mean - expected) / se;
        ok &= z.abs() <= 3.0;
        notes.push(format!("n={n}: {mean:.5} vs {expected:.5} (z={z:+.2})"));
    }
    Ok((ok, notes.join(", ")))
}

/// Replicates used by the adaptive Monte Carlo asymptote check. The spread
/// of `m_AMC(5000)` is about 3.7, so this many replicates put the standard
/// error near 0.02, well inside the ±0.05 tolerance.
pub const AMC_REPLICATES: u64 = 30_000;

/// Mean and standard error of `m_AMC(tries) - 2 ln(tries)` in one dimension.
pub fn amc_p1_offset(tries: u64, replicates: u64) -> Result<(f64, f64)> {
    let f = HalfSpace::new(1)?;
    let offsets = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let m = amc_evaluations(&f, tries, derive_seed(MASTER, 200, r))?;
            Ok(m as f64 - 2.0 * (tries as f64).ln())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_se(&offsets))
}

fn amc_p1() -> Result<(bool, String)> {
    let (mean, se) = amc_p1_offset(5000, AMC_REPLICATES)?;
    let target = amc_asymptote_p1();
    Ok((
        (mean - target).abs() <= 0.05,
        format!("mean m(5000) - 2 ln 5000 = {mean:.4} ± {se:.4}, target {target:.4}"),
    ))
}

/// A one-dimensional threshold function chosen online: every answer keeps
/// the longer half of the current uncertain interval.
#[derive(Debug)]
pub struct AdversarialThreshold {
    interval: Mutex<(f64, f64)>,
}

impl AdversarialThreshold {
    pub fn new() -> Self {
        Self {
            interval: Mutex::new((0.0, 1.0)),
        }
    }
}

impl Default for AdversarialThreshold {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle for AdversarialThreshold {
    fn dimension(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        let x = x.coords()[0];
        let mut iv = self.interval.lock().expect("adversary lock");
        let (lo, hi) = *iv;
        Ok(if x < lo {
            Label::Negative
        } else if x > hi {
            Label::Positive
        } else if x - lo >= hi - x {
            iv.1 = x;
            Label::Positive
        } else {
            iv.0 = x;
            Label::Negative
        })
    }

    fn id(&self) -> String {
        "adversarial_threshold".into()
    }
}

/// Exact uncertain volume after every step of a run.
fn volume_track(kind: StrategyKind, f: &dyn Oracle, budget: usize, seed: u64) -> Result<Vec<f64>> {
    let mut d = Designer::for_oracle(StrategySpec::new(kind, f.dimension(), budget, seed), f)?;
    let mut out = Vec::new();
    while d.step(f)?.is_some() {
        out.push(uncertain_volume(d.state())?.v_uncertain);
    }
    Ok(out)
}

fn rate_floor() -> Result<(bool, String)> {
    let mut failures = Vec::new();
    for kind in StrategyKind::ALL {
        let track = volume_track(kind, &AdversarialThreshold::new(), 20, 1)?;
        for (i, v) in track.iter().enumerate() {
            if *v < 2f64.powi(-(i as i32 + 1)) {
                failures.push(format!("{kind} beats 2^-n at n={} against the adversary", i + 1));
            }
        }
    }
    let mut rng = seeded(derive_seed(MASTER, 300, 0));
    for t in 0..20u64 {
        let threshold: f64 = rand::Rng::gen(&mut rng);
        let f = HalfSpace::with_level(1, threshold)?;
        // randomised strategies can get lucky on a fixed threshold; the floor
        // binds them only against the adversary above
        for kind in [StrategyKind::Gg, StrategyKind::Ag, StrategyKind::Gi, StrategyKind::Ai] {
            let track = volume_track(kind, &f, 20, t)?;
            for (i, v) in track.iter().enumerate() {
                let floor = 2f64.powi(-(i as i32 + 1));
                if *v < floor {
                    failures.push(format!("{kind} at threshold {threshold:.4}: {v} < 2^-{}", i + 1));
                }
                if kind == StrategyKind::Gi && *v != floor {
                    failures.push(format!("GI at threshold {threshold:.4}: {v} != 2^-{}", i + 1));
                }
            }
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            "no strategy beats 2^-n against the adversary for n <= 20; grid strategies respect it on 20 thresholds; GI attains it exactly".into()
        } else {
            failures.into_iter().take(5).collect::<Vec<_>>().join("; ")
        },
    ))
}

fn table_constants() -> (bool, String) {
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    let mc: Vec<f64> = (2..=6).map(|p| round2(mc_constant(p))).collect();
    let grid: Vec<f64> = (2..=4).map(|p| round2(grid_adaptive_constant(p))).collect();
    let amc: Vec<f64> = (2..=3).map(|p| round2(amc_constant(p))).collect();
    let ok = mc == [2.51, 2.43, 2.67, 2.87, 3.06] && grid == [8.0, 6.0, 6.64] && amc == [12.57, 4.65];
    (ok, format!("MC {mc:?}, GG/GI {grid:?}, AMC {amc:?}"))
}

fn comparable_pairs() -> Result<(bool, String)> {
    let sg2 = count_comparable_pairs(&gen_sg(2, 81)?);
    let sg5 = count_comparable_pairs(&gen_sg(5, 243)?);
    let seeds = 200u64;
    let lhd = (0..seeds)
        .map(|s| Ok(count_comparable_pairs(&gen_lhd(2, 81, derive_seed(MASTER, 400, s))?) as f64))
        .sum::<Result<f64>>()?
        / seeds as f64;
    let mc = (0..seeds)
        .map(|s| Ok(count_comparable_pairs(&gen_mc(2, 81, derive_seed(MASTER, 401, s))?) as f64))
        .sum::<Result<f64>>()?
        / seeds as f64;
    let ok = sg2 == 1944 && sg5 == 7533 && (lhd - 1619.0).abs() <= 30.0 && (mc - 1620.0).abs() <= 30.0;
    Ok((ok, format!("SG(2,81) {sg2}, SG(5,243) {sg5}, LHD {lhd:.1}, MC {mc:.1}")))
}

/// Uncertain volume of AG on the illustration function after 8 and 16
/// evaluations.
pub fn illustration_volumes() -> Result<(f64, f64)> {
    let track = volume_track(StrategyKind::Ag, &Illustration, 16, 0)?;
    if track.len() < 16 {
        return Err(Error::usage("AG stopped before 16 evaluations"));
    }
    Ok((track[7], track[15]))
}

fn illustration_ag() -> Result<(bool, String)> {
    let (v8, v16) = illustration_volumes()?;
    Ok((
        (v8 - 0.375).abs() <= 0.01 && (v16 - 0.188).abs() <= 0.01,
        format!("v(8) = {v8}, v(16) = {v16}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adversary_keeps_the_longer_half() {
        let f = AdversarialThreshold::new();
        let x = |v: f64| UnitPoint::new(vec![v]).unwrap();
        assert_eq!(f.evaluate(&x(0.5)).unwrap(), Label::Positive);
        assert_eq!(f.evaluate(&x(0.1)).unwrap(), Label::Negative);
        assert_eq!(f.evaluate(&x(0.09)).unwrap(), Label::Negative);
        assert_eq!(f.evaluate(&x(0.7)).unwrap(), Label::Positive);
    }

    #[test]
    fn cheap_checks_pass() {
        for name in ["table-constants", "illustration-ag", "si-identity"] {
            let out = run_check(name).unwrap();
            assert!(out.passed, "{name}: {}", out.detail);
        }
        assert!(run_check("nope").is_err());
    }
}
