//! Sigmoid calibration by Newton's method with the smoothed targets of
//! Lin, Lin and Weng.

use crate::error::{Error, Result};
use crate::monotone::Label;

pub const PLATT_MAX_ITER: usize = 100;
/// Bound on `|a|`; separable decision values otherwise push it to infinity.
pub const PLATT_MAX_SLOPE: f64 = 50.0;
const GRADIENT_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;

/// Probability of `+1` for decision value `s`.
pub fn sigmoid(a: f64, b: f64, s: f64) -> f64 {
    let f = a * s + b;
    if f >= 0.0 {
        let e = (-f).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + f.exp())
    }
}

pub fn fit(s: &[f64], labels: &[Label]) -> Result<(f64, f64)> {
    let prior1 = labels.iter().filter(|l| **l == Label::Positive).count() as f64;
    let prior0 = labels.len() as f64 - prior1;
    if prior1 == 0.0 || prior0 == 0.0 {
        return Err(Error::usage("calibration needs both classes"));
    }
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = labels
        .iter()
        .map(|l| if *l == Label::Positive { hi } else { lo })
        .collect();
    let objective = |a: f64, b: f64| -> f64 {
        s.iter()
            .zip(&t)
            .map(|(si, ti)| {
                let f = si * a + b;
                if f >= 0.0 {
                    ti * f + (1.0 + (-f).exp()).ln()
                } else {
                    (ti - 1.0) * f + (1.0 + f.exp()).ln()
                }
            })
            .sum()
    };
    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut fval = objective(a, b);
    for _ in 0..PLATT_MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (si, ti) in s.iter().zip(&t) {
            let f = si * a + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += si * si * d2;
            h22 += d2;
            h21 += si * d2;
            let d1 = ti - p;
            g1 += si * d1;
            g2 += d1;
        }
        if g1.abs() < GRADIENT_TOL && g2.abs() < GRADIENT_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved || a.abs() > PLATT_MAX_SLOPE {
            break;
        }
    }
    Ok((a.clamp(-PLATT_MAX_SLOPE, PLATT_MAX_SLOPE), b))
}
