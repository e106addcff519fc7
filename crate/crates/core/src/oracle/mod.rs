//! Outcome sources.
//!
//! Every oracle is deterministic and monotone non-decreasing on the unit
//! cube. Physical input spaces and decreasing inputs are handled by wrapping
//! with a [`Transform`]; discrete input spaces expose their lawful values
//! through a [`Domain`].

mod analytic;
mod staircase;
mod tabular;
mod transform;

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use analytic::{
    arctan_mu_range, ArctanContour, Constant, HalfSpace, Illustration, UpperFace, ARCTAN_MU_RANGES,
};
pub use staircase::Staircase;
pub use tabular::{synthetic_crash_table, Table, TableRow, TabularOracle};
pub use transform::{AxisMap, Direction, Mapping, PhysicalModel, Transform, Transformed};

use crate::error::{Error, Result};
use crate::monotone::{Label, UnitPoint};
use crate::rng::Rng;

pub trait Oracle: Send + Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, x: &UnitPoint) -> Result<Label>;

    /// Lawful input values, when the input space is not the whole cube.
    fn domain(&self) -> Option<&Domain> {
        None
    }

    /// Short identifier used in result tables.
    fn id(&self) -> String;
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        (**self).evaluate(x)
    }
    fn domain(&self) -> Option<&Domain> {
        (**self).domain()
    }
    fn id(&self) -> String {
        (**self).id()
    }
}

impl<O: Oracle + ?Sized> Oracle for Arc<O> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        (**self).evaluate(x)
    }
    fn domain(&self) -> Option<&Domain> {
        (**self).domain()
    }
    fn id(&self) -> String {
        (**self).id()
    }
}

/// Per-axis lawful values; `None` means the whole interval `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    axes: Vec<Option<Vec<f64>>>,
}

/// Lawful-value comparisons tolerate this much rounding.
pub(crate) const LATTICE_TOL: f64 = 1e-12;

impl Domain {
    pub fn new(mut axes: Vec<Option<Vec<f64>>>) -> Self {
        for values in axes.iter_mut().flatten() {
            values.sort_by(f64::total_cmp);
            values.dedup();
        }
        Self { axes }
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Option<Vec<f64>>] {
        &self.axes
    }

    pub fn is_finite(&self) -> bool {
        self.axes.iter().all(Option::is_some)
    }

    pub fn contains(&self, x: &UnitPoint) -> bool {
        x.coords().iter().zip(&self.axes).all(|(c, axis)| match axis {
            None => true,
            Some(values) => values.iter().any(|v| (v - c).abs() <= LATTICE_TOL),
        })
    }

    /// Number of lawful points, when finite.
    pub fn size(&self) -> Option<usize> {
        self.axes
            .iter()
            .map(|a| a.as_ref().map(Vec::len))
            .try_fold(1usize, |acc, n| n.map(|n| acc * n))
    }

    /// All lawful points in lexicographic order, when finite.
    pub fn points(&self) -> Option<Vec<UnitPoint>> {
        let axes: Vec<&Vec<f64>> = self.axes.iter().map(Option::as_ref).collect::<Option<_>>()?;
        let total = self.size()?;
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..total {
            out.push(UnitPoint::from_unchecked(
                idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect(),
            ));
            for k in (0..axes.len()).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        Some(out)
    }

    /// A uniform lawful point: uniform per discrete axis, uniform on `[0,1)`
    /// for continuous ones.
    pub fn sample(&self, rng: &mut Rng) -> UnitPoint {
        UnitPoint::from_unchecked(
            self.axes
                .iter()
                .map(|axis| match axis {
                    None => rng.gen::<f64>(),
                    Some(values) => values[rng.gen_range(0..values.len())],
                })
                .collect(),
        )
    }
}

/// Draws a uniform point from the oracle's domain, or the whole cube.
pub fn sample_input(domain: Option<&Domain>, dimension: usize, rng: &mut Rng) -> UnitPoint {
    match domain {
        Some(d) => d.sample(rng),
        None => UnitPoint::from_unchecked((0..dimension).map(|_| rng.gen::<f64>()).collect()),
    }
}

/// Serializable description of an oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    Illustration,
    ArctanContour {
        p: usize,
        mu: f64,
    },
    HalfSpace {
        p: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<f64>,
    },
    Staircase {
        p: usize,
        resolution: usize,
        seed: u64,
    },
    UpperFace {
        p: usize,
    },
    Constant {
        p: usize,
        label: Label,
    },
    Tabular {
        table: PathBuf,
        transform: PathBuf,
    },
    Transformed {
        transform: Transform,
        model: PhysicalModel,
    },
    Interactive {
        p: usize,
    },
}

impl OracleSpec {
    pub fn dimension(&self) -> Result<usize> {
        Ok(match self {
            OracleSpec::Illustration => 2,
            OracleSpec::ArctanContour { p, .. }
            | OracleSpec::HalfSpace { p, .. }
            | OracleSpec::Staircase { p, .. }
            | OracleSpec::UpperFace { p }
            | OracleSpec::Constant { p, .. }
            | OracleSpec::Interactive { p } => *p,
            OracleSpec::Transformed { transform, .. } => transform.dimension(),
            OracleSpec::Tabular { .. } => self.build()?.dimension(),
        })
    }

    pub fn build(&self) -> Result<Box<dyn Oracle>> {
        Ok(match self {
            OracleSpec::Illustration => Box::new(Illustration),
            OracleSpec::ArctanContour { p, mu } => Box::new(ArctanContour::new(*p, *mu)?),
            OracleSpec::HalfSpace { p, level } => Box::new(match level {
                Some(level) => HalfSpace::with_level(*p, *level)?,
                None => HalfSpace::new(*p)?,
            }),
            OracleSpec::Staircase {
                p,
                resolution,
                seed,
            } => Box::new(Staircase::random(*p, *resolution, *seed)?),
            OracleSpec::UpperFace { p } => Box::new(UpperFace::new(*p)?),
            OracleSpec::Constant { p, label } => Box::new(Constant::new(*p, *label)?),
            OracleSpec::Tabular { table, transform } => {
                let transform: Transform = serde_json::from_reader(std::fs::File::open(transform)?)?;
                let table = Table::read_csv(table)?;
                Box::new(TabularOracle::new(table, transform)?)
            }
            OracleSpec::Transformed { transform, model } => {
                Box::new(Transformed::new(transform.clone(), model.clone())?)
            }
            OracleSpec::Interactive { .. } => {
                return Err(Error::usage(
                    "interactive oracles are answered through a design session, not evaluated in process",
                ))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn domain_enumerates_and_samples_lawful_points() {
        let d = Domain::new(vec![Some(vec![0.5, 0.0, 1.0]), None]);
        assert!(!d.is_finite());
        assert!(d.points().is_none());
        let mut r = rng::seeded(1);
        for _ in 0..100 {
            assert!(d.contains(&d.sample(&mut r)));
        }
        let f = Domain::new(vec![Some(vec![0.0, 1.0]), Some(vec![0.25, 0.5, 0.75])]);
        assert_eq!(f.size(), Some(6));
        let pts = f.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(!f.contains(&UnitPoint::new(vec![0.3, 0.25]).unwrap()));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = OracleSpec::ArctanContour { p: 3, mu: 2.0 };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"kind":"arctan_contour","p":3,"mu":2.0}"#);
        assert_eq!(serde_json::from_str::<OracleSpec>(&j).unwrap(), s);
        assert!(OracleSpec::Interactive { p: 2 }.build().is_err());
    }
}
