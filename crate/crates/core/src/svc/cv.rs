use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::SvcModel;
use crate::error::{Error, Result};
use crate::monotone::{Label, LabeledPoint};
use crate::rng;

pub const CV_FOLDS: usize = 5;
/// Observations of each class needed before an SVC is fitted.
pub const MIN_PER_CLASS: usize = 5;

/// `{2^k / p : k = -6..=6}`, ascending.
pub fn gamma_grid(p: usize) -> Vec<f64> {
    (-6..=6).map(|k| 2f64.powi(k) / p.max(1) as f64).collect()
}

/// Fold index of every observation: each class is shuffled with the seed and
/// dealt round-robin into the folds.
fn stratified_folds(data: &[LabeledPoint], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    let mut fold = vec![0usize; data.len()];
    let mut next = 0usize;
    for label in [Label::Negative, Label::Positive] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data[i].label == label).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % folds;
            next += 1;
        }
    }
    fold
}

/// The grid value with the fewest cross-validated misclassifications; ties
/// go to the smaller width.
pub fn select_gamma_cv(data: &[LabeledPoint], grid: &[f64], folds: usize, seed: u64) -> Result<f64> {
    let pos = data.iter().filter(|d| d.label == Label::Positive).count();
    let neg = data.len() - pos;
    if pos < MIN_PER_CLASS || neg < MIN_PER_CLASS {
        return Err(Error::MajorityFallback {
            needed: MIN_PER_CLASS,
            negative: neg,
            positive: pos,
        });
    }
    if grid.is_empty() {
        return Err(Error::usage("gamma grid is empty"));
    }
    if folds < 2 {
        return Err(Error::usage("cross-validation needs at least two folds"));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let fold = stratified_folds(data, folds, seed);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    // Per fold, widest kernel first; each fit starts from the previous
    // solution rescaled by the squared width ratio.
    let per_fold: Vec<Result<Vec<usize>>> = (0..folds)
        .into_par_iter()
        .map(|k| {
            let train: Vec<LabeledPoint> = data
                .iter()
                .zip(&fold)
                .filter(|(_, f)| **f != k)
                .map(|(d, _)| d.clone())
                .collect();
            let mut wrong = vec![0usize; grid.len()];
            let mut prev: Option<(f64, Vec<f64>)> = None;
            for &g in order.iter().rev() {
                let gamma = grid[g];
                let start = prev.take().map(|(pg, a)| {
                    let r = (pg / gamma).powi(2);
                    a.into_iter().map(|x| x * r).collect()
                });
                let model = SvcModel::fit_from(&train, gamma, start)?;
                wrong[g] = data
                    .iter()
                    .zip(&fold)
                    .filter(|(d, f)| **f == k && model.predict(&d.point) != d.label)
                    .count();
                prev = Some((gamma, model.alphas));
            }
            Ok(wrong)
        })
        .collect();
    let mut errors = vec![0usize; grid.len()];
    for w in per_fold {
        let w = w?;
        for (e, x) in errors.iter_mut().zip(w) {
            *e += x;
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for i in order {
        let e = errors[i];
        if best.map_or(true, |(b, _)| e < b) {
            best = Some((e, grid[i]));
        }
    }
    Ok(best.expect("grid is non-empty").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::UnitPoint;

    fn data(n: usize) -> Vec<LabeledPoint> {
        (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                LabeledPoint::new(UnitPoint::new(vec![x]).unwrap(), Label::from_sign(x - 0.5))
            })
            .collect()
    }

    #[test]
    fn grid_has_thirteen_ascending_values() {
        let g = gamma_grid(2);
        assert_eq!(g.len(), 13);
        assert_eq!(g[6], 0.5);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn guard_signals_majority_fallback() {
        let mut d = data(20);
        d.retain(|x| x.label == Label::Positive || x.point.coords()[0] > 0.3);
        assert!(matches!(
            select_gamma_cv(&d, &gamma_grid(1), 5, 1),
            Err(Error::MajorityFallback { .. })
        ));
    }

    #[test]
    fn single_value_grid() {
        assert_eq!(select_gamma_cv(&data(20), &[3.0], 5, 1).unwrap(), 3.0);
    }

    #[test]
    fn folds_are_stratified() {
        let d = data(20);
        let f = stratified_folds(&d, 5, 9);
        for k in 0..5 {
            let neg = (0..20).filter(|&i| f[i] == k && d[i].label == Label::Negative).count();
            assert_eq!(neg, 2);
        }
    }

    #[test]
    fn selection_is_seeded() {
        let d = data(30);
        let g = gamma_grid(1);
        assert_eq!(select_gamma_cv(&d, &g, 5, 4).unwrap(), select_gamma_cv(&d, &g, 5, 4).unwrap());
    }
}
