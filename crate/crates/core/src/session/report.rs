use serde::{Deserialize, Serialize};

use super::{Session, SessionStatus};
use crate::error::{Error, Result};
use crate::monotone::{Certainty, Label, UnitPoint};
use crate::oracle::Direction;
use crate::rng::derive_seed;
use crate::strategy::StrategyKind;
use crate::svc::{Classifier, SvcModel, MIN_PER_CLASS};
use crate::volume::{uncertain_volume_auto, VolumeReport};

/// Version of the report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A two-dimensional cut through the cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRequest {
    /// The horizontal and vertical axes.
    pub dims: (usize, usize),
    /// Cells per side.
    pub grid: usize,
    /// Unit coordinates of the other axes, indexed by axis (entries for
    /// `dims` are ignored). Defaults to 0.5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<f64>>,
}

impl SliceRequest {
    pub fn new(dims: (usize, usize), grid: usize) -> Self {
        Self { dims, grid, fixed: None }
    }
}

/// Classes at cell centres: `-1` certainly negative, `1` certainly positive,
/// `0` uncertain. `cells[r][c]` is the cell whose centre has coordinate
/// `(c + 0.5) / grid` on `dims.0` and `(r + 0.5) / grid` on `dims.1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRaster {
    pub dims: (usize, usize),
    pub grid: usize,
    pub fixed: Vec<f64>,
    pub cells: Vec<Vec<i8>>,
    pub uncertain_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub name: String,
    pub unit: String,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub unit: UnitPoint,
    pub physical: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub session_id: String,
    pub strategy: StrategyKind,
    pub dimension: usize,
    pub status: SessionStatus,
    pub axes: Vec<AxisInfo>,
    pub evaluated: Vec<ReportPoint>,
    pub negative_frontier: Vec<ReportPoint>,
    pub positive_frontier: Vec<ReportPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pending: Option<ReportPoint>,
    pub volume: VolumeReport,
    pub v_history: Vec<f64>,
    /// Present once each class has at least five observations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<SvcModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceRaster>,
}

fn point(s: &Session, x: &UnitPoint, index: Option<usize>, label: Option<Label>) -> Result<ReportPoint> {
    Ok(ReportPoint {
        index,
        unit: x.clone(),
        physical: s.record.transform.apply(x)?,
        label,
    })
}

pub(super) fn build(s: &Session, slice: Option<&SliceRequest>) -> Result<Report> {
    let state = s.designer.state();
    let p = state.dimension();
    let evaluated = s
        .designer
        .history()
        .iter()
        .map(|r| point(s, &r.point, Some(r.index), Some(r.label)))
        .collect::<Result<Vec<_>>>()?;
    let frontier = |pts: &[UnitPoint]| pts.iter().map(|x| point(s, x, None, None)).collect::<Result<Vec<_>>>();
    let pending = s.designer.pending().map(|x| point(s, x, None, None)).transpose()?;
    let n = state.evaluated().len() as u64;
    let volume = uncertain_volume_auto(state, derive_seed(s.record.strategy.seed, 50, n))?;

    let classifier = if state.count(Label::Negative) >= MIN_PER_CLASS && state.count(Label::Positive) >= MIN_PER_CLASS {
        match Classifier::train(state.evaluated(), derive_seed(s.record.strategy.seed, 60, n))? {
            Classifier::Svc { mut model } => {
                model.calibrate(state.evaluated())?;
                Some(model)
            }
            Classifier::Majority { .. } => None,
        }
    } else {
        None
    };

    let default_slice = (p >= 2).then(|| SliceRequest::new((0, 1), 64));
    let slice = match slice.or(default_slice.as_ref()) {
        Some(req) => Some(raster(s, req)?),
        None => None,
    };

    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        session_id: s.record.id.clone(),
        strategy: s.record.strategy.kind,
        dimension: p,
        status: s.record.status.clone(),
        axes: s
            .record
            .transform
            .axes
            .iter()
            .map(|a| AxisInfo {
                name: a.name.clone(),
                unit: a.unit.clone(),
                direction: a.direction,
            })
            .collect(),
        evaluated,
        negative_frontier: frontier(state.negative_frontier())?,
        positive_frontier: frontier(state.positive_frontier())?,
        pending,
        volume,
        v_history: s.record.v_history.clone(),
        classifier,
        slice,
    })
}

/// Largest raster side accepted.
pub const MAX_SLICE_GRID: usize = 1024;

fn raster(s: &Session, req: &SliceRequest) -> Result<SliceRaster> {
    let state = s.designer.state();
    let p = state.dimension();
    let (a, b) = req.dims;
    if a >= p || b >= p || a == b {
        return Err(Error::usage(format!(
            "slice dims must be two distinct axes below {p}, got {a},{b}"
        )));
    }
    if req.grid == 0 || req.grid > MAX_SLICE_GRID {
        return Err(Error::usage(format!("grid must be between 1 and {MAX_SLICE_GRID}")));
    }
    let fixed = match &req.fixed {
        Some(f) if f.len() != p => {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: f.len(),
            })
        }
        Some(f) => {
            if f.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::usage("fixed coordinates must lie in [0, 1]"));
            }
            f.clone()
        }
        None => vec![0.5; p],
    };
    let g = req.grid;
    let mut x = fixed.clone();
    let mut cells = vec![vec![0i8; g]; g];
    let mut unknown = 0usize;
    for (r, row) in cells.iter_mut().enumerate() {
        x[b] = (r as f64 + 0.5) / g as f64;
        for (c, cell) in row.iter_mut().enumerate() {
            x[a] = (c as f64 + 0.5) / g as f64;
            *cell = match state.classify(&UnitPoint::from_unchecked(x.clone()))? {
                Certainty::CertainNegative => -1,
                Certainty::CertainPositive => 1,
                Certainty::Unknown => {
                    unknown += 1;
                    0
                }
            };
        }
    }
    Ok(SliceRaster {
        dims: req.dims,
        grid: g,
        fixed,
        cells,
        uncertain_fraction: unknown as f64 / (g * g) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Illustration, Oracle, Transform};
    use crate::session::SuggestResponse;
    use crate::strategy::StrategySpec;

    fn illustration_session(n: usize) -> Session {
        let f = Illustration;
        let mut s = Session::create(Transform::identity(2), StrategySpec::new(StrategyKind::Ag, 2, n, 0), None).unwrap();
        while let SuggestResponse::Evaluate { unit, .. } = s.suggest().unwrap() {
            s.record_outcome(f.evaluate(&unit).unwrap().as_i8()).unwrap();
        }
        s
    }

    #[test]
    fn raster_matches_the_exact_volume() {
        let s = illustration_session(16);
        let r = s.report(Some(&SliceRequest::new((0, 1), 64))).unwrap();
        let slice = r.slice.unwrap();
        assert!((slice.uncertain_fraction - r.volume.v_uncertain).abs() <= 1.0 / 64.0 / 64.0);
        assert!((r.volume.v_uncertain - 0.1875).abs() < 1e-12);
        assert!(r.classifier.is_some());
    }

    #[test]
    fn small_sessions_have_no_classifier() {
        let s = illustration_session(1);
        let r = s.report(None).unwrap();
        assert!(r.classifier.is_none());
        assert_eq!(r.evaluated.len(), 1);
    }

    #[test]
    fn empty_session_is_all_uncertain() {
        let s = Session::create(Transform::identity(2), StrategySpec::new(StrategyKind::Ag, 2, 5, 0), None).unwrap();
        let r = s.report(Some(&SliceRequest::new((1, 0), 8))).unwrap();
        assert_eq!(r.slice.unwrap().uncertain_fraction, 1.0);
    }

    #[test]
    fn bad_slices_are_rejected() {
        let s = illustration_session(1);
        assert!(s.report(Some(&SliceRequest::new((0, 0), 8))).is_err());
        assert!(s.report(Some(&SliceRequest::new((0, 2), 8))).is_err());
        assert!(s.report(Some(&SliceRequest::new((0, 1), 0))).is_err());
    }
}
