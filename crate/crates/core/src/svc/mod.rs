//! Gaussian-kernel hard-margin support vector classification.
//!
//! The decision function is `s(x) = Σ α_i f_i exp(-γ‖x - x_i‖²) + b` and the
//! predicted label is `sgn s(x)` with `sgn 0 = +1`. The kernel width is chosen
//! by stratified 5-fold cross-validation; with fewer than five observations
//! of either class the classifier falls back to the majority label.

mod cv;
mod platt;
mod solver;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use cv::{gamma_grid, select_gamma_cv, CV_FOLDS, MIN_PER_CLASS};
pub use platt::{PLATT_MAX_SLOPE, PLATT_MAX_ITER};
pub use solver::{KKT_TOLERANCE, MAX_ITERATIONS};

use crate::error::{Error, Result};
use crate::monotone::{Label, LabeledPoint, UnitPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvcModel {
    /// Every training point, aligned with `alphas`.
    pub support_points: Vec<LabeledPoint>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platt_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platt_b: Option<f64>,
    /// False if the solver hit its iteration cap before the KKT tolerance.
    pub converged: bool,
}

fn validate(data: &[LabeledPoint]) -> Result<usize> {
    let Some(first) = data.first() else {
        return Err(Error::usage("no training data"));
    };
    let p = first.point.dimension();
    let mut seen = HashSet::with_capacity(data.len());
    for d in data {
        if d.point.dimension() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: d.point.dimension(),
            });
        }
        if !seen.insert(&d.point) {
            return Err(Error::usage(format!(
                "training point {:?} appears twice",
                d.point
            )));
        }
    }
    let pos = data.iter().filter(|d| d.label == Label::Positive).count();
    if pos == 0 || pos == data.len() {
        return Err(Error::usage(
            "training data has a single class; use the majority rule instead",
        ));
    }
    Ok(p)
}

impl SvcModel {
    /// Fits the hard-margin dual for a fixed kernel width.
    pub fn fit(data: &[LabeledPoint], gamma: f64) -> Result<Self> {
        Self::fit_from(data, gamma, None)
    }

    /// Fits starting the solver at `start`, which must satisfy `α >= 0` and
    /// `Σ α_i f_i = 0`.
    pub(crate) fn fit_from(data: &[LabeledPoint], gamma: f64, start: Option<Vec<f64>>) -> Result<Self> {
        validate(data)?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::usage("gamma must be positive"));
        }
        let y: Vec<f64> = data.iter().map(|d| d.label.as_i8() as f64).collect();
        let k = solver::gram(data, gamma);
        let sol = solver::solve_from(&y, &k, start);
        if !sol.converged {
            log::debug!(
                "SVC solver stopped after {} iterations without reaching tolerance",
                sol.iterations
            );
        }
        let bias = bias_from(&y, &k, &sol.alphas);
        Ok(Self {
            support_points: data.to_vec(),
            alphas: sol.alphas,
            bias,
            gamma,
            platt_a: None,
            platt_b: None,
            converged: sol.converged,
        })
    }

    /// Kernel sum without the bias.
    fn kernel_sum(&self, x: &[f64]) -> f64 {
        self.support_points
            .iter()
            .zip(&self.alphas)
            .filter(|(_, a)| **a > 0.0)
            .map(|(s, a)| a * s.label.as_i8() as f64 * solver::kernel(s.point.coords(), x, self.gamma))
            .sum()
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.kernel_sum(x) + self.bias
    }

    pub fn predict(&self, x: &UnitPoint) -> Label {
        Label::from_sign(self.decision_value(x.coords()))
    }

    /// Recomputes the bias from the alphas: the mean of
    /// `f(x) - Σ α_y f_y K(x, y)` over points with `α > 0`.
    pub fn recompute_bias(&self) -> f64 {
        let y: Vec<f64> = self.support_points.iter().map(|d| d.label.as_i8() as f64).collect();
        let k = solver::gram(&self.support_points, self.gamma);
        bias_from(&y, &k, &self.alphas)
    }

    /// `½ Σ α_i α_j f_i f_j K_ij - Σ α_i`.
    pub fn dual_objective(&self) -> f64 {
        dual_objective(&self.support_points, self.gamma, &self.alphas)
    }

    /// `Σ α_i f_i`; zero for a feasible solution.
    pub fn equality_residual(&self) -> f64 {
        self.support_points
            .iter()
            .zip(&self.alphas)
            .map(|(d, a)| a * d.label.as_i8() as f64)
            .sum()
    }

    /// Fits a sigmoid `1 / (1 + exp(a s + b))` to the decision values of
    /// `data`.
    pub fn calibrate(&mut self, data: &[LabeledPoint]) -> Result<()> {
        let s: Vec<f64> = data.iter().map(|d| self.decision_value(d.point.coords())).collect();
        let labels: Vec<Label> = data.iter().map(|d| d.label).collect();
        let (a, b) = platt::fit(&s, &labels)?;
        self.platt_a = Some(a);
        self.platt_b = Some(b);
        Ok(())
    }

    /// Calibrated probability of `+1`, if calibrated.
    pub fn probability(&self, x: &[f64]) -> Option<f64> {
        let (a, b) = (self.platt_a?, self.platt_b?);
        Some(platt::sigmoid(a, b, self.decision_value(x)))
    }
}

fn bias_from(y: &[f64], k: &[Vec<f64>], alphas: &[f64]) -> f64 {
    let n = y.len();
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        if alphas[i] > 0.0 {
            let s: f64 = (0..n).map(|j| alphas[j] * y[j] * k[i][j]).sum();
            total += y[i] - s;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Dual objective at arbitrary `alphas` for the given data and width.
pub fn dual_objective(data: &[LabeledPoint], gamma: f64, alphas: &[f64]) -> f64 {
    let k = solver::gram(data, gamma);
    let y: Vec<f64> = data.iter().map(|d| d.label.as_i8() as f64).collect();
    let n = data.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * k[i][j];
        }
    }
    0.5 * quad - alphas.iter().sum::<f64>()
}

/// A fitted predictor: the SVC, or the majority label when either class has
/// fewer than [`MIN_PER_CLASS`] observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Svc { model: SvcModel },
    Majority { label: Label },
}

impl Classifier {
    /// Chooses the kernel width by cross-validation over [`gamma_grid`] and
    /// fits on all of `data`.
    pub fn train(data: &[LabeledPoint], seed: u64) -> Result<Self> {
        let pos = data.iter().filter(|d| d.label == Label::Positive).count();
        let neg = data.len() - pos;
        if pos < MIN_PER_CLASS || neg < MIN_PER_CLASS {
            return Ok(Classifier::Majority {
                label: majority(neg, pos),
            });
        }
        let p = data[0].point.dimension();
        let gamma = select_gamma_cv(data, &gamma_grid(p), CV_FOLDS, seed)?;
        let model = SvcModel::fit(data, gamma)?;
        if !model.converged {
            log::warn!("SVC fit at gamma {gamma} stopped at the iteration cap");
        }
        Ok(Classifier::Svc { model })
    }

    pub fn predict(&self, x: &UnitPoint) -> Label {
        match self {
            Classifier::Svc { model } => model.predict(x),
            Classifier::Majority { label } => *label,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Classifier::Svc { model } => Some(model.gamma),
            Classifier::Majority { .. } => None,
        }
    }
}

/// Majority label; ties go to `+1`, matching `sgn 0 = +1`.
pub fn majority(negative: usize, positive: usize) -> Label {
    if negative > positive {
        Label::Negative
    } else {
        Label::Positive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], l: i8) -> LabeledPoint {
        LabeledPoint::new(UnitPoint::new(c.to_vec()).unwrap(), Label::try_from(l).unwrap())
    }

    #[test]
    fn separates_a_simple_pair() {
        let m = SvcModel::fit(&[lp(&[0.2], -1), lp(&[0.8], 1)], 10.0).unwrap();
        assert_eq!(m.predict(&UnitPoint::new(vec![0.1]).unwrap()), Label::Negative);
        assert_eq!(m.predict(&UnitPoint::new(vec![0.9]).unwrap()), Label::Positive);
        assert!(m.converged);
    }

    #[test]
    fn symmetric_pair_has_zero_decision_at_the_midpoint() {
        let d = 0.15;
        let data = [lp(&[0.5 - d], -1), lp(&[0.5 + d], 1)];
        let mut m = SvcModel::fit(&data, 3.0).unwrap();
        assert!(m.decision_value(&[0.5]).abs() < 1e-6);
        assert_eq!(m.predict(&UnitPoint::new(vec![0.4]).unwrap()), Label::Negative);
        m.calibrate(&data).unwrap();
        assert!((m.probability(&[0.5]).unwrap() - 0.5).abs() < 1e-6);
        assert!(m.probability(&[0.9]).unwrap() > 0.5);
    }

    #[test]
    fn bias_formula_is_reproduced() {
        let data = [
            lp(&[0.1, 0.1], -1),
            lp(&[0.4, 0.2], -1),
            lp(&[0.3, 0.6], 1),
            lp(&[0.9, 0.5], 1),
            lp(&[0.2, 0.35], -1),
        ];
        let m = SvcModel::fit(&data, 4.0).unwrap();
        assert!((m.recompute_bias() - m.bias).abs() < 1e-10);
        assert!(m.equality_residual().abs() < 1e-8);
        assert!(m.alphas.iter().all(|a| *a >= 0.0));
        for d in &data {
            assert_eq!(m.predict(&d.point), d.label);
        }
    }

    #[test]
    fn single_class_and_duplicates_are_rejected() {
        assert!(SvcModel::fit(&[lp(&[0.1], -1), lp(&[0.2], -1)], 1.0).is_err());
        assert!(SvcModel::fit(&[lp(&[0.1], -1), lp(&[0.1], 1)], 1.0).is_err());
    }

    #[test]
    fn majority_fallback() {
        let data: Vec<_> = (0..8).map(|i| lp(&[i as f64 / 10.0], -1)).collect();
        let c = Classifier::train(&data, 0).unwrap();
        assert_eq!(c, Classifier::Majority { label: Label::Negative });
        assert_eq!(c.predict(&UnitPoint::new(vec![1.0]).unwrap()), Label::Negative);
        assert_eq!(c.gamma(), None);
    }

    #[test]
    fn model_serializes() {
        let m = SvcModel::fit(&[lp(&[0.2], -1), lp(&[0.8], 1)], 10.0).unwrap();
        let back: SvcModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
