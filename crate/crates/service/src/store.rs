//! File-per-pathway store.
//!
//! Each pathway lives in `{subject}.session` under the data directory. The
//! directory is scanned once at open; afterwards the in-memory map is the
//! read path and every write goes through [`write_atomic`] before the map is
//! updated, so memory never runs ahead of disk.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::Serialize;

use ptc_core::codec::{
    read_session_document, write_session_document, CodecError, SessionDocument,
    SESSION_SCHEMA_VERSION,
};
use ptc_core::model::{validate, PathwayError, PathwayRecord, Violation};

use crate::atomic::{write_atomic, FaultHook, TEMP_SUFFIX};
use crate::config::StoreConfig;

pub const SESSION_EXT: &str = "session";
pub const QUARANTINE_SUFFIX: &str = ".bad";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoredPathway {
    pub pathway: PathwayRecord,
    pub last_modified: DateTime<Utc>,
}

impl StoredPathway {
    pub fn document(&self) -> SessionDocument {
        SessionDocument {
            schema_version: SESSION_SCHEMA_VERSION,
            pathway: self.pathway.clone(),
            last_modified: Some(self.last_modified),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathwaySummary {
    pub subject_id: String,
    pub version: u64,
    pub event_count: usize,
    pub last_modified: DateTime<Utc>,
}

/// A session file that failed to load and was renamed aside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarantineReport {
    pub file: PathBuf,
    pub moved_to: Option<PathBuf>,
    pub reason: String,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("data directory {0} does not exist")]
    DataDirMissing(PathBuf),
    #[error("data directory {path} is not writable: {source}")]
    NotWritable { path: PathBuf, source: io::Error },
    #[error("version conflict: expected {expected}, stored {current}")]
    VersionConflict { expected: u64, current: u64 },
    #[error("pathway is not valid")]
    InvalidPathway(Vec<Violation>),
    #[error(transparent)]
    Rejected(#[from] PathwayError),
    #[error("store is read-only")]
    ReadOnlyStore,
    #[error("no pathway for subject `{0}`")]
    NotFound(String),
    #[error("a pathway for subject `{0}` already exists")]
    AlreadyExists(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Filename-safe form of a subject id: `[A-Za-z0-9_-]` and non-leading `.`
/// pass through, everything else becomes `%XX` per UTF-8 byte.
pub fn encode_subject(subject_id: &str) -> String {
    let mut out = String::with_capacity(subject_id.len());
    for (i, b) in subject_id.bytes().enumerate() {
        let keep = b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && i > 0);
        if keep {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn session_path(data_dir: &Path, subject_id: &str) -> PathBuf {
    data_dir.join(format!("{}.{SESSION_EXT}", encode_subject(subject_id)))
}

pub struct Store {
    cfg: StoreConfig,
    records: RwLock<BTreeMap<String, StoredPathway>>,
    write_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    quarantined: Vec<QuarantineReport>,
    fault: Option<FaultHook>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("data_dir", &self.cfg.data_dir)
            .field("read_only", &self.cfg.read_only)
            .finish_non_exhaustive()
    }
}

fn probe_writable(dir: &Path) -> io::Result<()> {
    let probe = dir.join(format!(".ptc-write-probe-{}", std::process::id()));
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)
}

impl Store {
    pub fn open(cfg: StoreConfig) -> Result<Store, StoreError> {
        let dir = cfg.data_dir.clone();
        if !dir.is_dir() {
            return Err(StoreError::DataDirMissing(dir));
        }
        if !cfg.read_only {
            probe_writable(&dir).map_err(|source| StoreError::NotWritable {
                path: dir.clone(),
                source,
            })?;
        }

        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();

        let mut records = BTreeMap::new();
        let mut quarantined = Vec::new();
        for path in entries {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default();
            if name.ends_with(&format!(".{SESSION_EXT}{TEMP_SUFFIX}")) {
                // Leftover from an interrupted write; the real file is intact.
                if !cfg.read_only {
                    let _ = fs::remove_file(&path);
                }
                continue;
            }
            if path.extension().and_then(|e| e.to_str()) != Some(SESSION_EXT) || !path.is_file() {
                continue;
            }
            let loaded = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|text| read_session_document(&text).map_err(|e| e.to_string()))
                .and_then(|doc| {
                    let id = doc.pathway.subject_id.clone();
                    if records.contains_key(&id) {
                        Err(format!("duplicate subject id `{id}`"))
                    } else {
                        Ok(doc)
                    }
                });
            match loaded {
                Ok(doc) => {
                    let last_modified = doc.last_modified.unwrap_or_else(|| {
                        fs::metadata(&path)
                            .and_then(|m| m.modified())
                            .map(DateTime::<Utc>::from)
                            .unwrap_or_else(|_| Utc::now())
                    });
                    records.insert(
                        doc.pathway.subject_id.clone(),
                        StoredPathway {
                            pathway: doc.pathway,
                            last_modified,
                        },
                    );
                }
                Err(reason) => {
                    let moved_to = if cfg.read_only {
                        None
                    } else {
                        let mut bad = path.clone().into_os_string();
                        bad.push(QUARANTINE_SUFFIX);
                        let bad = PathBuf::from(bad);
                        fs::rename(&path, &bad).ok().map(|_| bad)
                    };
                    tracing::warn!(file = %path.display(), %reason, "quarantined session file");
                    quarantined.push(QuarantineReport {
                        file: path,
                        moved_to,
                        reason,
                    });
                }
            }
        }

        Ok(Store {
            cfg,
            records: RwLock::new(records),
            write_locks: Mutex::new(HashMap::new()),
            quarantined,
            fault: None,
        })
    }

    /// Installs a hook run between temp-file write and rename.
    pub fn with_fault_hook(mut self, hook: FaultHook) -> Self {
        self.fault = Some(hook);
        self
    }

    pub fn config(&self) -> &StoreConfig {
        &self.cfg
    }

    pub fn quarantined(&self) -> &[QuarantineReport] {
        &self.quarantined
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, subject_id: &str) -> Result<StoredPathway, StoreError> {
        self.records
            .read()
            .unwrap()
            .get(subject_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(subject_id.to_string()))
    }

    /// Summaries sorted by subject id.
    pub fn list(&self) -> Vec<PathwaySummary> {
        self.records
            .read()
            .unwrap()
            .values()
            .map(|s| PathwaySummary {
                subject_id: s.pathway.subject_id.clone(),
                version: s.pathway.version,
                event_count: s.pathway.events.len(),
                last_modified: s.last_modified,
            })
            .collect()
    }

    /// Consistent copy of every pathway, sorted by subject id.
    pub fn snapshot(&self) -> Vec<PathwayRecord> {
        self.records
            .read()
            .unwrap()
            .values()
            .map(|s| s.pathway.clone())
            .collect()
    }

    fn subject_lock(&self, subject_id: &str) -> Arc<Mutex<()>> {
        self.write_locks
            .lock()
            .unwrap()
            .entry(subject_id.to_string())
            .or_default()
            .clone()
    }

    fn current_version(&self, subject_id: &str) -> Option<u64> {
        self.records
            .read()
            .unwrap()
            .get(subject_id)
            .map(|s| s.pathway.version)
    }

    /// Must be called with the subject lock held.
    fn persist(
        &self,
        mut pathway: PathwayRecord,
        version: u64,
    ) -> Result<StoredPathway, StoreError> {
        pathway.version = version;
        let stored = StoredPathway {
            pathway,
            last_modified: Utc::now(),
        };
        let text = write_session_document(&stored.document())?;
        let path = session_path(&self.cfg.data_dir, &stored.pathway.subject_id);
        write_atomic(&path, text.as_bytes(), self.fault.as_ref())?;
        self.records
            .write()
            .unwrap()
            .insert(stored.pathway.subject_id.clone(), stored.clone());
        Ok(stored)
    }

    fn check_writable(&self) -> Result<(), StoreError> {
        if self.cfg.read_only {
            Err(StoreError::ReadOnlyStore)
        } else {
            Ok(())
        }
    }

    /// Stores `p`, replacing any existing record. The stored version is 1 for
    /// a new subject and the previous version + 1 otherwise.
    pub fn put(&self, p: PathwayRecord, expected_version: Option<u64>) -> Result<u64, StoreError> {
        self.check_writable()?;
        let violations = validate(&p);
        if !violations.is_empty() {
            return Err(StoreError::InvalidPathway(violations));
        }
        let lock = self.subject_lock(&p.subject_id);
        let _guard = lock.lock().unwrap();
        let current = self.current_version(&p.subject_id);
        if let Some(expected) = expected_version {
            if current != Some(expected) {
                return Err(StoreError::VersionConflict {
                    expected,
                    current: current.unwrap_or(0),
                });
            }
        }
        let version = current.map_or(1, |v| v + 1);
        Ok(self.persist(p, version)?.pathway.version)
    }

    /// Stores a new subject; fails if one already exists.
    pub fn create(&self, p: PathwayRecord) -> Result<StoredPathway, StoreError> {
        self.check_writable()?;
        let violations = validate(&p);
        if !violations.is_empty() {
            return Err(StoreError::InvalidPathway(violations));
        }
        let lock = self.subject_lock(&p.subject_id);
        let _guard = lock.lock().unwrap();
        if self.current_version(&p.subject_id).is_some() {
            return Err(StoreError::AlreadyExists(p.subject_id));
        }
        self.persist(p, 1)
    }

    /// Applies `f` to a copy of the stored record and persists the result.
    /// Nothing is written if `f` fails or the version check does not pass.
    pub fn update<T, F>(
        &self,
        subject_id: &str,
        expected_version: Option<u64>,
        f: F,
    ) -> Result<(StoredPathway, T), StoreError>
    where
        F: FnOnce(&mut PathwayRecord) -> Result<T, PathwayError>,
    {
        self.check_writable()?;
        let lock = self.subject_lock(subject_id);
        let _guard = lock.lock().unwrap();
        let mut record = self.get(subject_id)?.pathway;
        let current = record.version;
        if let Some(expected) = expected_version {
            if expected != current {
                return Err(StoreError::VersionConflict { expected, current });
            }
        }
        let out = f(&mut record)?;
        let stored = self.persist(record, current + 1)?;
        Ok((stored, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ptc_core::fixture::example123;

    #[test]
    fn subject_encoding() {
        assert_eq!(encode_subject("Example123"), "Example123");
        assert_eq!(encode_subject("../etc"), "%2E.%2Fetc");
        assert_eq!(encode_subject("a b/c"), "a%20b%2Fc");
        assert_eq!(encode_subject("é"), "%C3%A9");
    }

    #[test]
    fn open_missing_dir() {
        let err = Store::open(StoreConfig::new("/nonexistent/ptc")).unwrap_err();
        assert!(matches!(err, StoreError::DataDirMissing(_)));
    }

    #[test]
    fn put_get_list() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(StoreConfig::new(dir.path())).unwrap();
        assert!(store.is_empty());
        assert_eq!(store.put(example123(), None).unwrap(), 1);
        assert_eq!(store.get("Example123").unwrap().pathway, example123());
        assert!(matches!(store.get("nope"), Err(StoreError::NotFound(_))));
        for id in ["C", "A"] {
            let mut p = example123();
            p.subject_id = id.into();
            store.put(p, None).unwrap();
        }
        let ids: Vec<_> = store.list().into_iter().map(|s| s.subject_id).collect();
        assert_eq!(ids, ["A", "C", "Example123"]);
    }

    #[test]
    fn stale_writer_conflicts() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(StoreConfig::new(dir.path())).unwrap();
        store.put(example123(), None).unwrap();
        assert_eq!(store.put(example123(), Some(1)).unwrap(), 2);
        assert!(matches!(
            store.put(example123(), Some(1)),
            Err(StoreError::VersionConflict {
                expected: 1,
                current: 2
            })
        ));
    }

    #[test]
    fn invalid_put_leaves_disk_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(StoreConfig::new(dir.path())).unwrap();
        store.put(example123(), None).unwrap();
        let path = session_path(dir.path(), "Example123");
        let before = fs::read(&path).unwrap();
        let mut bad = example123();
        bad.events[0].date = bad.admission + chrono::Duration::days(3);
        assert!(matches!(
            store.put(bad, None),
            Err(StoreError::InvalidPathway(_))
        ));
        assert_eq!(fs::read(&path).unwrap(), before);
    }

    #[test]
    fn read_only_rejects_writes() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(StoreConfig::new(dir.path()).read_only(true)).unwrap();
        assert!(matches!(
            store.put(example123(), None),
            Err(StoreError::ReadOnlyStore)
        ));
    }

    #[test]
    fn reopen_and_quarantine() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = Store::open(StoreConfig::new(dir.path())).unwrap();
            store.put(example123(), None).unwrap();
        }
        fs::write(dir.path().join("broken.session"), "{ nope").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let store = Store::open(StoreConfig::new(dir.path())).unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.quarantined().len(), 1);
        assert!(dir.path().join("broken.session.bad").exists());
        assert!(!dir.path().join("broken.session").exists());
    }

    #[test]
    fn update_is_atomic() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(StoreConfig::new(dir.path())).unwrap();
        store.put(example123(), None).unwrap();
        let err = store
            .update("Example123", None, |p| {
                p.events.clear();
                Err::<(), _>(PathwayError::EmptySubjectId)
            })
            .unwrap_err();
        assert!(matches!(err, StoreError::Rejected(_)));
        assert_eq!(store.get("Example123").unwrap().pathway.events.len(), 9);
        let (stored, ()) = store
            .update("Example123", Some(1), |p| {
                let id = p.events[0].id.clone();
                p.remove_event(&id).map(|_| ())
            })
            .unwrap();
        assert_eq!(stored.pathway.version, 2);
        assert_eq!(stored.pathway.events.len(), 8);
    }
}
