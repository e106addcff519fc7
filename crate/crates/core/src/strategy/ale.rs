//! Active learning by entropy: evaluate the candidate whose calibrated class
//! probability is closest to one half.

use std::collections::HashSet;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::Result;
use crate::monotone::{LabeledPoint, UnitPoint};
use crate::oracle::Domain;
use crate::rng::Rng;
use crate::svc::{gamma_grid, select_gamma_cv, SvcModel, CV_FOLDS};

/// Candidate sets larger than this are subsampled cell-by-cell.
pub const ALE_MAX_CANDIDATES: usize = 1 << 17;

/// Per-axis resolution of the candidate grid: 64 on the first two axes and
/// 16 on the rest, unless overridden.
pub fn candidate_resolutions(p: usize, grid: Option<usize>) -> Vec<usize> {
    match grid {
        Some(r) => vec![r; p],
        None => (0..p).map(|k| if k < 2 { 64 } else { 16 }).collect(),
    }
}

/// Jittered grid candidates (one uniform point per cell), or every
/// unevaluated lawful point of a finite domain.
pub fn candidates(
    p: usize,
    grid: Option<usize>,
    domain: Option<&Domain>,
    evaluated: &[LabeledPoint],
    rng: &mut Rng,
) -> Vec<UnitPoint> {
    if let Some(points) = domain.and_then(Domain::points) {
        let seen: HashSet<&UnitPoint> = evaluated.iter().map(|o| &o.point).collect();
        return points.into_iter().filter(|x| !seen.contains(x)).collect();
    }
    let res = candidate_resolutions(p, grid);
    let total = res.iter().try_fold(1usize, |acc, r| acc.checked_mul(*r));
    let jitter = |cell: &[usize], rng: &mut Rng| -> UnitPoint {
        let coords = cell
            .iter()
            .zip(&res)
            .enumerate()
            .map(|(k, (&c, &r))| {
                let lawful = domain.and_then(|d| d.axes()[k].as_ref());
                match lawful {
                    Some(values) => values[rng.gen_range(0..values.len())],
                    None => ((c as f64 + rng.gen::<f64>()) / r as f64).min(1.0),
                }
            })
            .collect();
        UnitPoint::from_unchecked(coords)
    };
    match total {
        Some(total) if total <= ALE_MAX_CANDIDATES => {
            let mut out = Vec::with_capacity(total);
            let mut cell = vec![0usize; p];
            for _ in 0..total {
                out.push(jitter(&cell, rng));
                for k in (0..p).rev() {
                    cell[k] += 1;
                    if cell[k] < res[k] {
                        break;
                    }
                    cell[k] = 0;
                }
            }
            out
        }
        _ => (0..ALE_MAX_CANDIDATES)
            .map(|_| {
                let cell: Vec<usize> = res.iter().map(|r| rng.gen_range(0..*r)).collect();
                jitter(&cell, rng)
            })
            .collect(),
    }
}

/// Binary entropy in nats; zero at the endpoints.
pub fn entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() };
    term(p) + term(1.0 - p)
}

/// Fits the calibrated SVC used to score candidates.
pub fn fit_model(data: &[LabeledPoint], seed: u64) -> Result<SvcModel> {
    let p = data[0].point.dimension();
    let gamma = select_gamma_cv(data, &gamma_grid(p), CV_FOLDS, seed)?;
    let mut model = SvcModel::fit(data, gamma)?;
    model.calibrate(data)?;
    Ok(model)
}

/// Index of the first candidate with maximal entropy.
pub fn select_max_entropy(model: &SvcModel, candidates: &[UnitPoint]) -> Option<usize> {
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|x| entropy(model.probability(x.coords()).unwrap_or(0.5)))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        if best.map_or(true, |(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn entropy_peaks_at_one_half() {
        assert!((entropy(0.5) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(0.0), 0.0);
        assert_eq!(entropy(1.0), 0.0);
    }

    #[test]
    fn candidate_grid_sizes() {
        let mut r = rng::seeded(1);
        assert_eq!(candidates(2, None, None, &[], &mut r).len(), 64 * 64);
        assert_eq!(candidates(3, None, None, &[], &mut r).len(), 64 * 64 * 16);
        assert_eq!(candidates(5, None, None, &[], &mut r).len(), ALE_MAX_CANDIDATES);
        let c = candidates(2, Some(4), None, &[], &mut r);
        assert_eq!(c.len(), 16);
        // one candidate per cell
        assert!(c[5].coords()[0] >= 0.25 && c[5].coords()[0] < 0.5);
        assert!(c[5].coords()[1] >= 0.25 && c[5].coords()[1] < 0.5);
    }

    #[test]
    fn finite_domains_use_unevaluated_lawful_points() {
        let d = Domain::new(vec![Some(vec![0.0, 1.0]), Some(vec![0.5])]);
        let seen = [LabeledPoint::new(
            UnitPoint::new(vec![0.0, 0.5]).unwrap(),
            crate::monotone::Label::Negative,
        )];
        let mut r = rng::seeded(1);
        let c = candidates(2, None, Some(&d), &seen, &mut r);
        assert_eq!(c, vec![UnitPoint::new(vec![1.0, 0.5]).unwrap()]);
    }
}
