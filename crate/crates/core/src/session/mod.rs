//! Persistent human-in-the-loop design sessions.
//!
//! A session pairs a [`Transform`] with a sequential strategy and waits for
//! outcomes from an external simulator. Its file stores the observation log;
//! the design state is rebuilt by replaying the log through a [`Designer`]
//! and checked against the stored snapshot on every load.

mod report;
mod store;

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use report::{AxisInfo, Report, ReportPoint, SliceRaster, SliceRequest, MAX_SLICE_GRID, REPORT_SCHEMA_VERSION};
pub use store::{SessionStore, SessionSummary};

use crate::error::{Error, Result, Violation};
use crate::monotone::{Label, UnitPoint};
use crate::oracle::Transform;
use crate::rng::derive_seed;
use crate::strategy::{Completion, Designer, StepRecord, StrategySpec, Suggestion};
use crate::volume::{uncertain_volume_auto, VolumeReport};

/// Version of the session file layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionStatus {
    ReadyToSuggest,
    AwaitingOutcome,
    Complete { reason: Completion, v_uncertain: f64 },
    /// Terminal. `attempted` is the outcome that contradicted the log.
    Corrupt {
        witnesses: Violation,
        attempted: Label,
    },
}

/// Derived state stored alongside the log so that a reload can prove the
/// replay reproduces it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub negative_frontier: Vec<UnitPoint>,
    pub positive_frontier: Vec<UnitPoint>,
    pub level: u32,
    pub candidates: Vec<UnitPoint>,
    pub v_uncertain: f64,
}

/// The on-disk form of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub schema_version: u32,
    pub id: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub transform: Transform,
    pub strategy: StrategySpec,
    pub status: SessionStatus,
    pub pending: Option<UnitPoint>,
    pub history: Vec<StepRecord>,
    /// Uncertain volume after each recorded outcome.
    pub v_history: Vec<f64>,
    pub state: StateSnapshot,
}

/// A coordinate in physical units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCoord {
    pub name: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuggestResponse {
    Evaluate {
        index: usize,
        unit: UnitPoint,
        physical: Vec<PhysicalCoord>,
    },
    Complete {
        reason: Completion,
        v_uncertain: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeResponse {
    pub record: StepRecord,
    pub volume: VolumeReport,
    pub status: SessionStatus,
}

pub struct Session {
    record: SessionRecord,
    designer: Designer,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn volume(designer: &Designer) -> Result<VolumeReport> {
    let n = designer.history().len() as u64;
    uncertain_volume_auto(designer.state(), derive_seed(designer.spec().seed, 50, n))
}

fn snapshot(designer: &Designer) -> Result<StateSnapshot> {
    let s = designer.state();
    Ok(StateSnapshot {
        negative_frontier: s.negative_frontier().to_vec(),
        positive_frontier: s.positive_frontier().to_vec(),
        level: s.level,
        candidates: s.candidates.clone(),
        v_uncertain: volume(designer)?.v_uncertain,
    })
}

impl Session {
    /// A new session; the transform and strategy must agree on dimension.
    pub fn create(transform: Transform, strategy: StrategySpec, name: Option<String>) -> Result<Self> {
        transform.validate()?;
        if transform.dimension() != strategy.dimension {
            return Err(Error::DimensionMismatch {
                expected: strategy.dimension,
                actual: transform.dimension(),
            });
        }
        let designer = Designer::new(strategy.clone(), transform.domain())?;
        let record = SessionRecord {
            schema_version: SCHEMA_VERSION,
            id: uuid::Uuid::new_v4().to_string(),
            created_at: now(),
            name,
            transform,
            strategy,
            status: SessionStatus::ReadyToSuggest,
            pending: None,
            history: Vec::new(),
            v_history: Vec::new(),
            state: snapshot(&designer)?,
        };
        Ok(Self { record, designer })
    }

    /// Rebuilds a session by replaying its log and checks the result
    /// against the stored snapshot.
    pub fn from_record(record: SessionRecord) -> Result<Self> {
        if record.schema_version != SCHEMA_VERSION {
            return Err(Error::SessionState(format!(
                "session {} has schema version {}, expected {SCHEMA_VERSION}",
                record.id, record.schema_version
            )));
        }
        let designer = replay(&record)?;
        let replayed = snapshot(&designer)?;
        if serde_json::to_string(&replayed)? != serde_json::to_string(&record.state)? {
            return Err(Error::SessionState(format!(
                "session {}: replaying the history does not reproduce the stored state",
                record.id
            )));
        }
        Ok(Self { record, designer })
    }

    pub fn id(&self) -> &str {
        &self.record.id
    }

    pub fn record(&self) -> &SessionRecord {
        &self.record
    }

    pub fn designer(&self) -> &Designer {
        &self.designer
    }

    pub fn status(&self) -> &SessionStatus {
        &self.record.status
    }

    pub fn physical(&self, x: &UnitPoint) -> Result<Vec<PhysicalCoord>> {
        let values = self.record.transform.apply(x)?;
        Ok(self
            .record
            .transform
            .axes
            .iter()
            .zip(values)
            .map(|(a, value)| PhysicalCoord {
                name: a.name.clone(),
                unit: a.unit.clone(),
                value,
            })
            .collect())
    }

    fn refresh(&mut self) -> Result<()> {
        self.record.state = snapshot(&self.designer)?;
        self.record.pending = self.designer.pending().cloned();
        self.record.history = self.designer.history().to_vec();
        Ok(())
    }

    /// The pending point, choosing one if none is pending.
    pub fn suggest(&mut self) -> Result<SuggestResponse> {
        if let SessionStatus::Corrupt { .. } = self.record.status {
            return Err(Error::SessionState(
                "the session is corrupt: its outcomes contradict monotonicity".into(),
            ));
        }
        match self.designer.suggest()? {
            Suggestion::Evaluate { point } => {
                self.record.status = SessionStatus::AwaitingOutcome;
                self.refresh()?;
                Ok(SuggestResponse::Evaluate {
                    index: self.designer.history().len() + 1,
                    physical: self.physical(&point)?,
                    unit: point,
                })
            }
            Suggestion::Complete { reason } => {
                let v_uncertain = self.record.state.v_uncertain;
                self.record.status = SessionStatus::Complete { reason, v_uncertain };
                self.refresh()?;
                Ok(SuggestResponse::Complete { reason, v_uncertain })
            }
        }
    }

    /// Records the outcome of the pending point. A contradiction marks the
    /// session corrupt and returns [`Error::NonMonotone`].
    pub fn record_outcome(&mut self, label: i8) -> Result<OutcomeResponse> {
        let label = Label::try_from(label)?;
        match self.record.status {
            SessionStatus::AwaitingOutcome => {}
            SessionStatus::Corrupt { .. } => {
                return Err(Error::SessionState("the session is corrupt".into()));
            }
            _ => {
                return Err(Error::SessionState(
                    "no suggestion is awaiting an outcome; call suggest first".into(),
                ));
            }
        }
        match self.designer.record(label) {
            Ok(record) => {
                let volume = volume(&self.designer)?;
                self.record.v_history.push(volume.v_uncertain);
                self.record.status = SessionStatus::ReadyToSuggest;
                self.refresh()?;
                Ok(OutcomeResponse {
                    record,
                    volume,
                    status: self.record.status.clone(),
                })
            }
            Err(Error::NonMonotone(v)) => {
                self.record.status = SessionStatus::Corrupt {
                    witnesses: v.clone(),
                    attempted: label,
                };
                Err(Error::NonMonotone(v))
            }
            Err(e) => Err(e),
        }
    }

    pub fn report(&self, slice: Option<&SliceRequest>) -> Result<Report> {
        report::build(self, slice)
    }
}

fn mismatch(id: &str, step: usize, what: &str) -> Error {
    Error::SessionState(format!("session {id}: replay diverges at step {step}: {what}"))
}

fn replay(record: &SessionRecord) -> Result<Designer> {
    if record.transform.dimension() != record.strategy.dimension {
        return Err(Error::DimensionMismatch {
            expected: record.strategy.dimension,
            actual: record.transform.dimension(),
        });
    }
    let mut d = Designer::new(record.strategy.clone(), record.transform.domain())?;
    for (i, step) in record.history.iter().enumerate() {
        match d.suggest()? {
            Suggestion::Evaluate { point } if point == step.point => {}
            _ => return Err(mismatch(&record.id, i + 1, "suggested point differs")),
        }
        let replayed = d.record(step.label)?;
        if &replayed != step {
            return Err(mismatch(&record.id, i + 1, "step record differs"));
        }
    }
    if let Some(p) = &record.pending {
        match d.suggest()? {
            Suggestion::Evaluate { point } if &point == p => {}
            _ => return Err(mismatch(&record.id, record.history.len() + 1, "pending point differs")),
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Oracle, Transform};
    use crate::strategy::StrategyKind;

    fn ag(p: usize, budget: usize) -> StrategySpec {
        StrategySpec::new(StrategyKind::Ag, p, budget, 0)
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            Session::create(Transform::ice_breaking(), ag(2, 10), None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ice_session_starts_on_the_corners_in_physical_units() {
        let mut s = Session::create(Transform::ice_breaking(), ag(3, 29), None).unwrap();
        let SuggestResponse::Evaluate { unit, physical, .. } = s.suggest().unwrap() else {
            panic!("expected a point");
        };
        assert!(unit.coords().iter().all(|c| *c == 0.0 || *c == 1.0));
        assert!(physical[0].value == 5.0 || physical[0].value == 40.0);
        assert_eq!(physical[0].unit, "m/s");
        // idempotent
        let again = s.suggest().unwrap();
        assert!(matches!(again, SuggestResponse::Evaluate { unit: u, .. } if u == unit));
    }

    #[test]
    fn outcome_before_suggest_is_a_conflict() {
        let mut s = Session::create(Transform::identity(2), ag(2, 5), None).unwrap();
        assert!(matches!(s.record_outcome(1), Err(Error::SessionState(_))));
        s.suggest().unwrap();
        assert!(s.record_outcome(0).is_err());
        s.record_outcome(1).unwrap();
        assert!(matches!(s.record_outcome(1), Err(Error::SessionState(_))));
    }

    #[test]
    fn contradiction_corrupts_and_survives_reload() {
        // grouped designs keep points that became certain within the group
        let gg = StrategySpec::new(StrategyKind::Gg, 1, 5, 3);
        let mut s = Session::create(Transform::identity(1), gg, None).unwrap();
        let SuggestResponse::Evaluate { unit, .. } = s.suggest().unwrap() else { panic!() };
        let first: i8 = if unit.coords()[0] == 0.0 { 1 } else { -1 };
        s.record_outcome(first).unwrap();
        s.suggest().unwrap();
        let err = s.record_outcome(-first).unwrap_err();
        let Error::NonMonotone(v) = err else { panic!("{err}") };
        let text = serde_json::to_string(s.record()).unwrap();
        let mut back = Session::from_record(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(
            back.status(),
            &SessionStatus::Corrupt { witnesses: v, attempted: Label::try_from(-first).unwrap() }
        );
        assert!(back.suggest().is_err());
        assert!(back.record_outcome(1).is_err());
    }

    #[test]
    fn replay_reproduces_every_intermediate_record() {
        let f = crate::oracle::Illustration;
        let mut s = Session::create(Transform::identity(2), ag(2, 20), None).unwrap();
        let mut last_v = 1.0;
        while let SuggestResponse::Evaluate { unit, .. } = s.suggest().unwrap() {
            let text = serde_json::to_string(s.record()).unwrap();
            let back = Session::from_record(serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(serde_json::to_string(back.record()).unwrap(), text);
            let out = s.record_outcome(f.evaluate(&unit).unwrap().as_i8()).unwrap();
            assert!(out.volume.v_uncertain <= last_v);
            last_v = out.volume.v_uncertain;
        }
        assert_eq!(s.record().history.len(), 20);
        assert!(matches!(s.status(), SessionStatus::Complete { reason: Completion::BudgetExhausted, .. }));
    }

    #[test]
    fn tampered_history_is_detected() {
        let f = crate::oracle::Illustration;
        let mut s = Session::create(Transform::identity(2), ag(2, 6), None).unwrap();
        while let SuggestResponse::Evaluate { unit, .. } = s.suggest().unwrap() {
            s.record_outcome(f.evaluate(&unit).unwrap().as_i8()).unwrap();
        }
        let mut rec = s.record().clone();
        rec.history[2].label = rec.history[2].label.flip();
        assert!(Session::from_record(rec).is_err());
        let mut rec = s.record().clone();
        rec.state.v_uncertain += 0.01;
        assert!(Session::from_record(rec).is_err());
    }
}
