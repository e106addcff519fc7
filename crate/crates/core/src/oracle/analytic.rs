use log::warn;

use super::Oracle;
use crate::error::{Error, Result};
use crate::monotone::{Label, UnitPoint};

fn check_dim(expected: usize, x: &UnitPoint) -> Result<()> {
    if x.dimension() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.dimension(),
        });
    }
    Ok(())
}

fn positive_dimension(p: usize) -> Result<usize> {
    if p == 0 {
        Err(Error::usage("dimension must be positive"))
    } else {
        Ok(p)
    }
}

/// Two-dimensional illustration function:
/// `+1` iff `x1² + x2² + 15((x1-0.5)+)² + 3((x2-0.2)+)^0.4 >= 2.84`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Illustration;

impl Illustration {
    pub fn score(x1: f64, x2: f64) -> f64 {
        let a = (x1 - 0.5).max(0.0);
        let b = (x2 - 0.2).max(0.0);
        x1 * x1 + x2 * x2 + 15.0 * a * a + 3.0 * b.powf(0.4)
    }
}

impl Oracle for Illustration {
    fn dimension(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        check_dim(2, x)?;
        let c = x.coords();
        Ok(Label::from_sign(Illustration::score(c[0], c[1]) - 2.84))
    }

    fn id(&self) -> String {
        "illustration".into()
    }
}

/// `μ` ranges giving a negative-region volume between 10% and 90%, for
/// `p = 2..=6`.
pub const ARCTAN_MU_RANGES: [(usize, f64, f64); 5] = [
    (2, 0.92, 2.10),
    (3, 1.53, 2.95),
    (4, 2.14, 3.75),
    (5, 2.76, 4.59),
    (6, 3.43, 5.40),
];

pub fn arctan_mu_range(p: usize) -> Option<(f64, f64)> {
    ARCTAN_MU_RANGES
        .iter()
        .find(|(q, _, _)| *q == p)
        .map(|(_, lo, hi)| (*lo, *hi))
}

/// Benchmark family: `+1` iff `Σ_i arctan(5(p+1-i) x_i / (p+1)) >= μ`.
#[derive(Clone, Debug)]
pub struct ArctanContour {
    p: usize,
    mu: f64,
}

impl ArctanContour {
    pub fn new(p: usize, mu: f64) -> Result<Self> {
        positive_dimension(p)?;
        if !mu.is_finite() {
            return Err(Error::usage("mu must be finite"));
        }
        match arctan_mu_range(p) {
            Some((lo, hi)) if mu < lo || mu > hi => {
                warn!("mu = {mu} lies outside the calibrated range [{lo}, {hi}] for p = {p}")
            }
            None => warn!("no calibrated mu range for p = {p}"),
            _ => {}
        }
        Ok(Self { p, mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let p = self.p as f64;
        x.iter()
            .enumerate()
            .map(|(k, xi)| {
                let i = (k + 1) as f64;
                (5.0 * (p + 1.0 - i) * xi / (p + 1.0)).atan()
            })
            .sum()
    }
}

impl Oracle for ArctanContour {
    fn dimension(&self) -> usize {
        self.p
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        check_dim(self.p, x)?;
        Ok(Label::from_sign(self.score(x.coords()) - self.mu))
    }

    fn id(&self) -> String {
        format!("arctan_p{}_mu{:.6}", self.p, self.mu)
    }
}

/// `-1` iff `Σ x_k < level`; the default level `p/2` gives the worst-case
/// half-space function of the asymptotic theorems.
#[derive(Clone, Debug)]
pub struct HalfSpace {
    p: usize,
    level: f64,
}

impl HalfSpace {
    pub fn new(p: usize) -> Result<Self> {
        Self::with_level(p, p as f64 / 2.0)
    }

    pub fn with_level(p: usize, level: f64) -> Result<Self> {
        positive_dimension(p)?;
        if !level.is_finite() {
            return Err(Error::usage("half-space level must be finite"));
        }
        Ok(Self { p, level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

impl Oracle for HalfSpace {
    fn dimension(&self) -> usize {
        self.p
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        check_dim(self.p, x)?;
        let s: f64 = x.coords().iter().sum();
        Ok(if s < self.level {
            Label::Negative
        } else {
            Label::Positive
        })
    }

    fn id(&self) -> String {
        format!("halfspace_p{}_level{}", self.p, self.level)
    }
}

/// `+1` iff some coordinate equals one. Attains the worst-case uncertain
/// volume of the full static grid.
#[derive(Clone, Debug)]
pub struct UpperFace {
    p: usize,
}

impl UpperFace {
    pub fn new(p: usize) -> Result<Self> {
        Ok(Self {
            p: positive_dimension(p)?,
        })
    }
}

impl Oracle for UpperFace {
    fn dimension(&self) -> usize {
        self.p
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        check_dim(self.p, x)?;
        Ok(if x.coords().iter().any(|c| *c >= 1.0) {
            Label::Positive
        } else {
            Label::Negative
        })
    }

    fn id(&self) -> String {
        format!("upper_face_p{}", self.p)
    }
}

#[derive(Clone, Debug)]
pub struct Constant {
    p: usize,
    label: Label,
}

impl Constant {
    pub fn new(p: usize, label: Label) -> Result<Self> {
        Ok(Self {
            p: positive_dimension(p)?,
            label,
        })
    }
}

impl Oracle for Constant {
    fn dimension(&self) -> usize {
        self.p
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        check_dim(self.p, x)?;
        Ok(self.label)
    }

    fn id(&self) -> String {
        format!("constant_p{}_{}", self.p, self.label)
    }
}
