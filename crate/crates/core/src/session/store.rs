use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Session, SessionRecord, SessionStatus};
use crate::error::{Error, Result};
use crate::oracle::Transform;
use crate::strategy::{StrategyKind, StrategySpec};

/// One JSON file per session under a data directory.
#[derive(Clone, Debug)]
pub struct SessionStore {
    dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub created_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub strategy: StrategyKind,
    pub dimension: usize,
    pub evaluations: usize,
    pub v_uncertain: f64,
    pub status: SessionStatus,
}

impl SessionSummary {
    pub fn of(record: &SessionRecord) -> Self {
        Self {
            id: record.id.clone(),
            created_at: record.created_at,
            name: record.name.clone(),
            strategy: record.strategy.kind,
            dimension: record.strategy.dimension,
            evaluations: record.history.len(),
            v_uncertain: record.state.v_uncertain,
            status: record.status.clone(),
        }
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl SessionStore {
    /// Opens (creating if needed) the data directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        if !valid_id(id) {
            return Err(Error::SessionNotFound(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    /// Creates and persists a session.
    pub fn create(&self, transform: Transform, strategy: StrategySpec, name: Option<String>) -> Result<Session> {
        let s = Session::create(transform, strategy, name)?;
        self.save(&s)?;
        Ok(s)
    }

    /// Writes the session file atomically (temp file, then rename).
    pub fn save(&self, session: &Session) -> Result<()> {
        let path = self.path(session.id())?;
        let tmp = self.dir.join(format!(".{}.json.tmp", session.id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&serde_json::to_vec_pretty(session.record())?)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn read_record(&self, id: &str) -> Result<SessionRecord> {
        let path = self.path(id)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::SessionNotFound(id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads and replays a session.
    pub fn load(&self, id: &str) -> Result<Session> {
        Session::from_record(self.read_record(id)?)
    }

    /// Summaries of every session, oldest first.
    pub fn list(&self) -> Result<Vec<SessionSummary>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            if path.extension().and_then(|e| e.to_str()) != Some("json") || !valid_id(stem) {
                continue;
            }
            match self.read_record(stem) {
                Ok(r) => out.push(SessionSummary::of(&r)),
                Err(e) => log::warn!("skipping unreadable session file {}: {e}", path.display()),
            }
        }
        out.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Oracle, Transform};
    use crate::session::SuggestResponse;

    #[test]
    fn sessions_persist_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert!(store.list().unwrap().is_empty());
        let spec = StrategySpec::new(StrategyKind::Ag, 2, 10, 0);
        let a = store.create(Transform::identity(2), spec.clone(), None).unwrap();
        let b = store.create(Transform::identity(2), spec, Some("b".into())).unwrap();
        assert_ne!(a.id(), b.id());
        assert_eq!(store.list().unwrap().len(), 2);

        let f = crate::oracle::Illustration;
        let mut s = store.load(a.id()).unwrap();
        for _ in 0..5 {
            let SuggestResponse::Evaluate { unit, .. } = s.suggest().unwrap() else { panic!() };
            store.save(&s).unwrap();
            let mut s2 = store.load(a.id()).unwrap();
            assert_eq!(s2.suggest().unwrap(), s.suggest().unwrap());
            s.record_outcome(f.evaluate(&unit).unwrap().as_i8()).unwrap();
            store.save(&s).unwrap();
        }
        let on_disk = fs::read(dir.path().join(format!("{}.json", a.id()))).unwrap();
        let reloaded = store.load(a.id()).unwrap();
        assert_eq!(serde_json::to_vec_pretty(reloaded.record()).unwrap(), on_disk);
    }

    #[test]
    fn unknown_and_hostile_ids_are_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert!(matches!(store.load("nope"), Err(Error::SessionNotFound(_))));
        assert!(matches!(store.load("../etc/passwd"), Err(Error::SessionNotFound(_))));
    }
}
