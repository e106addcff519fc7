//! Closed-form volumes, bounds and constants for the static and adaptive
//! designs, plus simulation checks that compare them with the
//! implementation ([`checks`]).

pub mod checks;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::static_designs::integer_root;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    UpperBound,
    LowerBound,
    Asymptote,
}

/// A bound value, or the reason its theorem does not apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Value(f64),
    NotApplicable(String),
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(*v),
            Bound::NotApplicable(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<u32>,
    pub value: Bound,
    pub kind: BoundKind,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

fn grid_side(p: usize, n: u64, min: usize, what: &str) -> Result<usize> {
    if p == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    match integer_root(n as usize, p) {
        Some(k) if k >= min => Ok(k),
        _ => Err(Error::usage(format!("{what} needs n = k^{p} with k >= {min}, got n = {n}"))),
    }
}

/// Worst-case uncertain volume of the full static grid:
/// `1 - (k-2)^p / (k-1)^p` with `k = n^(1/p)`.
pub fn sg_worst_volume(p: usize, n: u64) -> Result<f64> {
    let k = grid_side(p, n, 2, "the full grid")? as f64;
    Ok(1.0 - ((k - 2.0) / (k - 1.0)).powi(p as i32))
}

/// Uncertain volume of the static inner grid, the same for every monotone
/// function: `1 - n / (n^(1/p) + 1)^p`.
pub fn si_volume(p: usize, n: u64) -> Result<f64> {
    let k = grid_side(p, n, 1, "the inner grid")? as f64;
    Ok(1.0 - n as f64 / (k + 1.0).powi(p as i32))
}

/// Lower bound on the worst-case uncertain volume of any static design.
pub fn static_lower_bound(p: usize, n: u64) -> Bound {
    if p == 0 {
        return Bound::NotApplicable("dimension must be positive".into());
    }
    if p == 1 {
        return Bound::Value(1.0 / (n as f64 + 1.0));
    }
    let need = 10f64.powi(p as i32 - 1) * (p as f64).powi(p as i32);
    if (n as f64) < need {
        return Bound::NotApplicable(format!("requires n >= 10^{}·{p}^{p} = {need}", p - 1));
    }
    let pf = p as f64;
    Bound::Value(
        2f64.powf(-1.0 / (pf - 1.0)) * 10f64.powf(-1.0 / pf) / factorial(p - 1) * (n as f64).powf(-1.0 / pf),
    )
}

/// Lower bound on the worst-case uncertain volume of any adaptive design.
pub fn adaptive_lower_bound(p: usize, n: u64) -> Bound {
    if p == 0 {
        return Bound::NotApplicable("dimension must be positive".into());
    }
    if p == 1 {
        return Bound::Value(2f64.powi(-(n.min(2000) as i32)));
    }
    let need = 4f64.powi(p as i32 - 2) * (p as f64).powi(p as i32);
    if (n as f64) < need {
        return Bound::NotApplicable(format!("requires n >= 4^{}·{p}^{p} = {need}", p - 2));
    }
    let pf = p as f64;
    Bound::Value(
        pf.powf(1.0 / (pf - 1.0)) * 2f64.powf(-(pf + 1.0) / (pf - 1.0)) / factorial(p - 1)
            * (n as f64).powf(-1.0 / (pf - 1.0)),
    )
}

/// Upper bound on the evaluations GG needs to finish level `g`:
/// `2^p + Σ_{l=1..g} p (2^l + 1)^(p-1)`.
pub fn gg_count_bound(p: usize, g: u32) -> u128 {
    let mut total = 1u128 << p;
    for l in 1..=g {
        total += p as u128 * ((1u128 << l) + 1).pow(p as u32 - 1);
    }
    total
}

/// Exact number of evaluations GI needs to finish level `g`, for every
/// monotone function: `Σ_{l=1..g} (2^l - 1)^p - (2^l - 2)^p`.
pub fn gi_count_exact(p: usize, g: u32) -> u128 {
    (1..=g)
        .map(|l| ((1u128 << l) - 1).pow(p as u32) - ((1u128 << l) - 2).pow(p as u32))
        .sum()
}

/// `g_p = Σ_{0 <= k < p/2} (-1)^k C(p,k) (p/2 - k)^(p-1)`.
pub fn g_p_constant(p: usize) -> f64 {
    let half = p as f64 / 2.0;
    (0..p)
        .take_while(|&k| (k as f64) < half)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(p, k) * (half - k as f64).powi(p as i32 - 1)
        })
        .sum()
}

/// Leading constant of the expected Monte Carlo uncertain volume on the
/// half-space function: `2 p!^(1/p - 1) Γ(1/p) g_p`.
pub fn mc_constant(p: usize) -> f64 {
    let pf = p as f64;
    2.0 * factorial(p).powf(1.0 / pf - 1.0) * libm::tgamma(1.0 / pf) * g_p_constant(p)
}

/// Leading constant of the expected adaptive Monte Carlo volume on the
/// half-space function: `c^(p/(p-1)) (p/(p-1))^(1/(p-1))` with `c` the
/// Monte Carlo constant. Needs `p >= 2`.
pub fn amc_constant(p: usize) -> f64 {
    let pf = p as f64;
    mc_constant(p).powf(pf / (pf - 1.0)) * (pf / (pf - 1.0)).powf(1.0 / (pf - 1.0))
}

/// Leading constant of the GG/GI worst-case rate:
/// `2 p^(p/(p-1)) (2^(p-1) - 1)^(-1/(p-1))`. Needs `p >= 2`.
pub fn grid_adaptive_constant(p: usize) -> f64 {
    let pf = p as f64;
    2.0 * pf.powf(pf / (pf - 1.0)) * (2f64.powi(p as i32 - 1) - 1.0).powf(-1.0 / (pf - 1.0))
}

/// Expected Monte Carlo uncertain length for the worst step function on
/// `[0,1]`: `(2 - 2^-n) / (n + 1)`; one with no data.
pub fn mc_worst_expected_volume_p1(n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (2.0 - 2f64.powi(-(n.min(2000) as i32))) / (n as f64 + 1.0)
}

/// Limit of `E m_AMC(n) - 2 ln n` in one dimension: `2(γ - ln 2)`.
pub fn amc_asymptote_p1() -> f64 {
    2.0 * (EULER_GAMMA - std::f64::consts::LN_2)
}

/// Every formula that applies at `(p, n)`.
pub fn bound_reports(p: usize, n: u64) -> Vec<BoundReport> {
    let report = |name: &str, value: Bound, kind| BoundReport {
        name: name.into(),
        p,
        n: Some(n),
        g: None,
        value,
        kind,
    };
    let from = |r: Result<f64>| match r {
        Ok(v) => Bound::Value(v),
        Err(e) => Bound::NotApplicable(e.to_string()),
    };
    let mut out = vec![
        report("sg_worst_volume", from(sg_worst_volume(p, n)), BoundKind::Exact),
        report("si_volume", from(si_volume(p, n)), BoundKind::Exact),
        report("static_lower_bound", static_lower_bound(p, n), BoundKind::LowerBound),
        report("adaptive_lower_bound", adaptive_lower_bound(p, n), BoundKind::LowerBound),
    ];
    if p == 1 {
        out.push(report(
            "mc_worst_expected_volume",
            Bound::Value(mc_worst_expected_volume_p1(n)),
            BoundKind::Exact,
        ));
    } else {
        let nf = n as f64;
        let pf = p as f64;
        out.push(report(
            "mc_expected_volume_halfspace",
            Bound::Value(mc_constant(p) * nf.powf(-1.0 / pf)),
            BoundKind::Asymptote,
        ));
        out.push(report(
            "amc_expected_volume_halfspace",
            Bound::Value(amc_constant(p) * nf.powf(-1.0 / (pf - 1.0))),
            BoundKind::Asymptote,
        ));
        out.push(report(
            "grid_adaptive_worst_volume",
            Bound::Value(grid_adaptive_constant(p) * nf.powf(-1.0 / (pf - 1.0))),
            BoundKind::Asymptote,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sg_examples() {
        assert!(close(sg_worst_volume(2, 9).unwrap(), 0.75, 1e-15));
        assert!(close(sg_worst_volume(1, 11).unwrap(), 0.1, 1e-15));
        let n = 1001u64 * 1001;
        assert!(close(sg_worst_volume(2, n).unwrap() / (2.0 / (n as f64).sqrt()), 1.0, 2e-3));
        assert!(sg_worst_volume(2, 10).is_err());
    }

    #[test]
    fn si_examples() {
        assert!(close(si_volume(2, 4).unwrap(), 5.0 / 9.0, 1e-15));
        assert!(close(si_volume(1, 1).unwrap(), 0.5, 1e-15));
        assert!(close(si_volume(3, 27).unwrap(), 1.0 - 27.0 / 64.0, 1e-15));
    }

    #[test]
    fn si_rate() {
        for p in 1..=3usize {
            for m in [50u64, 80] {
                let n = m.pow(p as u32);
                let ratio = si_volume(p, n).unwrap() / (p as f64 * (n as f64).powf(-1.0 / p as f64));
                assert!(close(ratio, 1.0, 0.05), "p={p} m={m} {ratio}");
            }
        }
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(static_lower_bound(1, 9), Bound::Value(0.1));
        let v = static_lower_bound(2, 40_000).value().unwrap();
        assert!(close(v, 7.906e-4, 1e-6), "{v}");
        assert!(static_lower_bound(2, 10).value().is_none());
        assert_eq!(adaptive_lower_bound(1, 5), Bound::Value(1.0 / 32.0));
        assert!(close(adaptive_lower_bound(2, 100).value().unwrap(), 2.5e-3, 1e-15));
        assert!(adaptive_lower_bound(3, 10).value().is_none());
    }

    #[test]
    fn adaptive_bound_never_exceeds_static_bound() {
        for p in 1..=5 {
            for n in [1u64, 10, 100, 1_000, 100_000, 10_000_000, 1_000_000_000] {
                if let (Some(a), Some(s)) = (adaptive_lower_bound(p, n).value(), static_lower_bound(p, n).value()) {
                    assert!(a <= s, "p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn count_formulas() {
        assert_eq!(gg_count_bound(1, 2), 4);
        assert_eq!(gg_count_bound(2, 1), 10);
        assert_eq!(gg_count_bound(2, 2), 20);
        for g in 1..10 {
            assert_eq!(gi_count_exact(1, g), g as u128);
        }
        assert_eq!(gi_count_exact(2, 2), 6);
        assert_eq!(gi_count_exact(3, 2), 20);
    }

    #[test]
    fn constants() {
        assert_eq!(g_p_constant(2), 1.0);
        assert!(close(g_p_constant(3), 1.5, 1e-15));
        let mc: Vec<f64> = (2..=6).map(|p| (mc_constant(p) * 100.0).round() / 100.0).collect();
        assert_eq!(mc, vec![2.51, 2.43, 2.67, 2.87, 3.06]);
        assert!(close(grid_adaptive_constant(2), 8.0, 1e-12));
        assert!(close(grid_adaptive_constant(3), 6.0, 1e-12));
        assert!(close(grid_adaptive_constant(4), 6.64, 5e-3));
        assert!(close(amc_constant(2), 12.57, 5e-3));
        assert!(close(amc_asymptote_p1(), -0.23186, 1e-5));
        assert!(close(mc_worst_expected_volume_p1(1), 0.75, 1e-15));
        assert_eq!(mc_worst_expected_volume_p1(0), 1.0);
    }
}
