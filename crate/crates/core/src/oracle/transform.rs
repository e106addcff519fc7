//! Maps between the unit cube and a physical input space.
//!
//! Each axis carries a strictly increasing mapping from `[0,1]` to physical
//! values and a direction. For a [`Direction::Decreasing`] axis the unit
//! coordinate is flipped (`x → 1 - x`) before mapping, so a simulation whose
//! outcome falls with the physical input becomes non-decreasing in `x`.

use serde::{Deserialize, Serialize};

use super::{Domain, Oracle, LATTICE_TOL};
use crate::error::{Error, Result};
use crate::monotone::{Label, UnitPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mapping {
    /// `physical = scale * u + offset`, `scale > 0`.
    Affine { scale: f64, offset: f64 },
    /// `(unit value, physical value)` pairs, strictly increasing in both.
    /// Without interpolation only the listed unit values are lawful.
    Piecewise {
        breakpoints: Vec<(f64, f64)>,
        #[serde(default)]
        interpolate: bool,
    },
}

/// Breakpoint physical values match within this tolerance.
const PHYSICAL_TOL: f64 = 1e-9;

impl Mapping {
    fn validate(&self) -> Result<()> {
        match self {
            Mapping::Affine { scale, offset } => {
                if !(scale.is_finite() && offset.is_finite() && *scale > 0.0) {
                    return Err(Error::usage("affine mappings need a finite positive scale"));
                }
            }
            Mapping::Piecewise { breakpoints, .. } => {
                if breakpoints.is_empty() {
                    return Err(Error::usage("piecewise mapping has no breakpoints"));
                }
                for (u, _) in breakpoints {
                    if !(0.0..=1.0).contains(u) {
                        return Err(Error::usage(format!("breakpoint {u} is outside [0,1]")));
                    }
                }
                if breakpoints
                    .windows(2)
                    .any(|w| !(w[0].0 < w[1].0 && w[0].1 < w[1].1))
                {
                    return Err(Error::usage(
                        "piecewise breakpoints must be strictly increasing in both columns",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Mapping::Piecewise {
                interpolate: false,
                ..
            }
        )
    }

    pub fn forward(&self, u: f64) -> Result<f64> {
        match self {
            Mapping::Affine { scale, offset } => Ok(scale * u + offset),
            Mapping::Piecewise {
                breakpoints,
                interpolate,
            } => {
                if let Some((_, v)) = breakpoints.iter().find(|(b, _)| (b - u).abs() <= LATTICE_TOL) {
                    return Ok(*v);
                }
                if *interpolate {
                    if let Some(w) = breakpoints.windows(2).find(|w| w[0].0 <= u && u <= w[1].0) {
                        let t = (u - w[0].0) / (w[1].0 - w[0].0);
                        return Ok(w[0].1 + t * (w[1].1 - w[0].1));
                    }
                }
                Err(Error::Domain(format!(
                    "unit value {u} is not lawful; lawful values are {:?}",
                    breakpoints.iter().map(|b| b.0).collect::<Vec<_>>()
                )))
            }
        }
    }

    pub fn inverse(&self, v: f64) -> Result<f64> {
        let u = match self {
            Mapping::Affine { scale, offset } => (v - offset) / scale,
            Mapping::Piecewise {
                breakpoints,
                interpolate,
            } => {
                if let Some((u, _)) = breakpoints.iter().find(|(_, b)| (b - v).abs() <= PHYSICAL_TOL) {
                    *u
                } else if let (true, Some(w)) = (
                    *interpolate,
                    breakpoints.windows(2).find(|w| w[0].1 <= v && v <= w[1].1),
                ) {
                    w[0].0 + (v - w[0].1) / (w[1].1 - w[0].1) * (w[1].0 - w[0].0)
                } else {
                    return Err(Error::Domain(format!("physical value {v} has no lawful preimage")));
                }
            }
        };
        if !(-LATTICE_TOL..=1.0 + LATTICE_TOL).contains(&u) {
            return Err(Error::Domain(format!("physical value {v} maps outside [0,1]")));
        }
        Ok(u.clamp(0.0, 1.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisMap {
    pub name: String,
    /// Free-text unit label, reported verbatim.
    #[serde(default)]
    pub unit: String,
    pub mapping: Mapping,
    pub direction: Direction,
    pub bounds: (f64, f64),
}

impl AxisMap {
    fn orient(&self, x: f64) -> f64 {
        match self.direction {
            Direction::Increasing => x,
            Direction::Decreasing => 1.0 - x,
        }
    }

    pub fn to_physical(&self, x: f64) -> Result<f64> {
        self.mapping.forward(self.orient(x))
    }

    pub fn to_unit(&self, v: f64) -> Result<f64> {
        Ok(self.orient(self.mapping.inverse(v)?) + 0.0)
    }

    /// Lawful unit-cube values of a discrete axis.
    pub fn lawful_values(&self) -> Option<Vec<f64>> {
        match &self.mapping {
            Mapping::Piecewise {
                breakpoints,
                interpolate: false,
            } => Some(breakpoints.iter().map(|(u, _)| self.orient(*u) + 0.0).collect()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub axes: Vec<AxisMap>,
}

impl Transform {
    pub fn new(axes: Vec<AxisMap>) -> Result<Self> {
        let t = Self { axes };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::usage("a transform needs at least one axis"));
        }
        for a in &self.axes {
            a.mapping.validate()?;
            if !(a.bounds.0 <= a.bounds.1) {
                return Err(Error::usage(format!("axis {} has empty bounds", a.name)));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn identity(p: usize) -> Self {
        Self {
            axes: (0..p)
                .map(|k| AxisMap {
                    name: format!("x{}", k + 1),
                    unit: String::new(),
                    mapping: Mapping::Affine {
                        scale: 1.0,
                        offset: 0.0,
                    },
                    direction: Direction::Increasing,
                    bounds: (0.0, 1.0),
                })
                .collect(),
        }
    }

    /// Ice-breaking campaign: impact velocity 5–40 m/s (outcome rises with
    /// it), ice thickness 5–15 mm and elastic modulus 1–5 GPa (outcome
    /// falls with both).
    pub fn ice_breaking() -> Self {
        let affine = |name: &str, unit: &str, lo: f64, hi: f64, direction| AxisMap {
            name: name.into(),
            unit: unit.into(),
            mapping: Mapping::Affine {
                scale: hi - lo,
                offset: lo,
            },
            direction,
            bounds: (lo, hi),
        };
        Self {
            axes: vec![
                affine("velocity", "m/s", 5.0, 40.0, Direction::Increasing),
                affine("thickness", "mm", 5.0, 15.0, Direction::Decreasing),
                affine("elastic_modulus", "GPa", 1.0, 5.0, Direction::Decreasing),
            ],
        }
    }

    fn glance_breakpoints(inner: bool) -> Vec<(f64, f64)> {
        let (first, last) = if inner {
            (1.0 / 256.0, 255.0 / 256.0)
        } else {
            (0.0, 1.0)
        };
        let mut b = vec![(first, 0.0), (1.0 / 128.0, 0.1)];
        b.extend((1..=63).map(|k| (k as f64 / 64.0, round_decimal(6.4 * k as f64 / 64.0 + 0.1))));
        b.push((127.0 / 128.0, 6.5));
        b.push((last, 6.6));
        b
    }

    fn crash(inner: bool) -> Self {
        let deceleration: Vec<(f64, f64)> = if inner {
            (1..=15)
                .map(|k| (k as f64 / 16.0, round_decimal(8.0 * k as f64 / 16.0 - 10.8)))
                .collect()
        } else {
            let mut d = vec![(0.0, -10.3)];
            d.extend((2..=14).map(|k| (k as f64 / 16.0, round_decimal(8.0 * k as f64 / 16.0 - 10.8))));
            d.push((1.0, -3.3));
            d
        };
        Self {
            axes: vec![
                AxisMap {
                    name: "glance_duration".into(),
                    unit: "s".into(),
                    mapping: Mapping::Piecewise {
                        breakpoints: Self::glance_breakpoints(inner),
                        interpolate: false,
                    },
                    direction: Direction::Increasing,
                    bounds: (0.0, 6.6),
                },
                AxisMap {
                    name: "deceleration".into(),
                    unit: "m/s^2".into(),
                    mapping: Mapping::Piecewise {
                        breakpoints: deceleration,
                        interpolate: false,
                    },
                    direction: Direction::Increasing,
                    bounds: (-10.3, -3.3),
                },
            ],
        }
    }

    /// Dyadic embedding of the 67 × 15 crash lattice for the full-grid
    /// strategies (GG, AG).
    pub fn crash_full_grid() -> Self {
        Self::crash(false)
    }

    /// Dyadic embedding of the 67 × 15 crash lattice for the inner-grid
    /// strategies (GI, AI).
    pub fn crash_inner_grid() -> Self {
        Self::crash(true)
    }

    pub fn apply(&self, x: &UnitPoint) -> Result<Vec<f64>> {
        if x.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: x.dimension(),
            });
        }
        x.coords()
            .iter()
            .zip(&self.axes)
            .map(|(c, a)| {
                a.to_physical(*c)
                    .map_err(|e| Error::Domain(format!("axis {}: {e}", a.name)))
            })
            .collect()
    }

    pub fn inverse(&self, physical: &[f64]) -> Result<UnitPoint> {
        if physical.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: physical.len(),
            });
        }
        let coords = physical
            .iter()
            .zip(&self.axes)
            .map(|(v, a)| a.to_unit(*v))
            .collect::<Result<Vec<_>>>()?;
        UnitPoint::new(coords)
    }

    /// Lawful unit values per axis, or `None` when every axis is continuous.
    pub fn domain(&self) -> Option<Domain> {
        let axes: Vec<Option<Vec<f64>>> = self.axes.iter().map(AxisMap::lawful_values).collect();
        axes.iter().any(Option::is_some).then(|| Domain::new(axes))
    }
}

/// Rounds to 12 decimals so that breakpoint values print as written.
fn round_decimal(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// A physical-space outcome model, used as a stand-in for an external
/// simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhysicalModel {
    /// `+1` iff `weights · v >= threshold`.
    Linear { weights: Vec<f64>, threshold: f64 },
    /// Ice-breaking stand-in on (velocity, thickness, modulus):
    /// `+1` iff `v² / (t^1.5 · e^0.5) >= threshold`.
    ImpactEnergy { threshold: f64 },
}

impl PhysicalModel {
    pub fn evaluate(&self, v: &[f64]) -> Result<Label> {
        match self {
            PhysicalModel::Linear { weights, threshold } => {
                if weights.len() != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: weights.len(),
                        actual: v.len(),
                    });
                }
                let s: f64 = weights.iter().zip(v).map(|(w, x)| w * x).sum();
                Ok(Label::from_sign(s - threshold))
            }
            PhysicalModel::ImpactEnergy { threshold } => {
                let [vel, thick, modulus] = v else {
                    return Err(Error::DimensionMismatch {
                        expected: 3,
                        actual: v.len(),
                    });
                };
                let s = vel * vel / (thick.powf(1.5) * modulus.sqrt());
                Ok(Label::from_sign(s - threshold))
            }
        }
    }
}

/// An oracle defined on a physical space, seen through a [`Transform`].
#[derive(Clone, Debug)]
pub struct Transformed {
    transform: Transform,
    model: PhysicalModel,
    domain: Option<Domain>,
}

impl Transformed {
    pub fn new(transform: Transform, model: PhysicalModel) -> Result<Self> {
        transform.validate()?;
        let domain = transform.domain();
        Ok(Self {
            transform,
            model,
            domain,
        })
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }
}

impl Oracle for Transformed {
    fn dimension(&self) -> usize {
        self.transform.dimension()
    }

    fn evaluate(&self, x: &UnitPoint) -> Result<Label> {
        let v = self.transform.apply(x)?;
        self.model.evaluate(&v)
    }

    fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    fn id(&self) -> String {
        format!("transformed_{:?}", self.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> UnitPoint {
        UnitPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn ice_breaking_maps_match_the_campaign_ranges() {
        let t = Transform::ice_breaking();
        assert_eq!(t.apply(&pt(&[0.0, 0.0, 0.0])).unwrap(), vec![5.0, 15.0, 5.0]);
        assert_eq!(t.apply(&pt(&[1.0, 1.0, 1.0])).unwrap(), vec![40.0, 5.0, 1.0]);
        // velocity 35x + 5, thickness -10x + 15, modulus -4x + 5
        let v = t.apply(&pt(&[0.5, 0.25, 0.75])).unwrap();
        assert_eq!(v, vec![22.5, 12.5, 2.0]);
    }

    #[test]
    fn crash_grid_maps() {
        let t = Transform::crash_full_grid();
        assert_eq!(t.apply(&pt(&[0.5, 0.0])).unwrap(), vec![3.3, -10.3]);
        assert_eq!(t.apply(&pt(&[1.0 / 128.0, 1.0])).unwrap(), vec![0.1, -3.3]);
        assert_eq!(t.apply(&pt(&[127.0 / 128.0, 0.125])).unwrap(), vec![6.5, -9.8]);
        let d = t.domain().unwrap();
        assert_eq!(d.size(), Some(67 * 15));
        let err = t.apply(&pt(&[0.3, 0.3])).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");

        let ai = Transform::crash_inner_grid();
        assert_eq!(ai.apply(&pt(&[1.0 / 256.0, 1.0 / 16.0])).unwrap(), vec![0.0, -10.3]);
        assert_eq!(ai.apply(&pt(&[255.0 / 256.0, 15.0 / 16.0])).unwrap(), vec![6.6, -3.3]);
        assert_eq!(ai.domain().unwrap().size(), Some(67 * 15));
    }

    #[test]
    fn affine_round_trip() {
        let t = Transform::ice_breaking();
        for x in [[0.1, 0.2, 0.3], [0.0, 1.0, 0.5], [0.77, 0.01, 0.99]] {
            let u = t.inverse(&t.apply(&pt(&x)).unwrap()).unwrap();
            for (a, b) in u.coords().iter().zip(x) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn discrete_inverse_recovers_breakpoints() {
        let t = Transform::crash_full_grid();
        assert_eq!(t.inverse(&[3.3, -9.8]).unwrap(), pt(&[0.5, 0.125]));
        assert!(t.inverse(&[3.35, -9.8]).is_err());
    }

    #[test]
    fn invalid_mappings_are_rejected() {
        let bad = Transform::new(vec![AxisMap {
            name: "a".into(),
            unit: String::new(),
            mapping: Mapping::Affine {
                scale: -1.0,
                offset: 0.0,
            },
            direction: Direction::Increasing,
            bounds: (0.0, 1.0),
        }]);
        assert!(bad.is_err());
    }

    #[test]
    fn impact_stand_in_is_monotone_in_unit_space() {
        let f = Transformed::new(
            Transform::ice_breaking(),
            PhysicalModel::ImpactEnergy { threshold: 8.0 },
        )
        .unwrap();
        let lo = f.evaluate(&pt(&[0.0, 0.0, 0.0])).unwrap();
        let hi = f.evaluate(&pt(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!((lo, hi), (Label::Negative, Label::Positive));
    }
}
