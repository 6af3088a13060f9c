//! Append-only session stores.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use thiserror::Error;

use newsxai_study::log::{write_event, LogError};
use newsxai_study::{SessionEvent, SessionHeader, SessionLog};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session {0} already exists")]
    Exists(String),
    #[error("session {0} not found")]
    Missing(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Log {
        path: String,
        #[source]
        source: LogError,
    },
}

/// Persistence for session logs. `append` must be durable when it returns.
pub trait SessionStore: Send + Sync {
    fn create(&self, study_id: &str, header: &SessionHeader) -> Result<(), StoreError>;
    fn append(&self, study_id: &str, session_id: &str, event: &SessionEvent) -> Result<(), StoreError>;
    fn load(&self, study_id: &str, session_id: &str) -> Result<SessionLog, StoreError>;
    /// Every stored log, keyed by (study, session).
    fn load_all(&self) -> Result<BTreeMap<(String, String), SessionLog>, StoreError>;
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    logs: Mutex<BTreeMap<(String, String), SessionLog>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SessionStore for MemoryStore {
    fn create(&self, study_id: &str, header: &SessionHeader) -> Result<(), StoreError> {
        let mut logs = self.logs.lock().expect("store lock");
        let key = (study_id.to_string(), header.session_id.clone());
        if logs.contains_key(&key) {
            return Err(StoreError::Exists(header.session_id.clone()));
        }
        logs.insert(
            key,
            SessionLog {
                header: header.clone(),
                events: Vec::new(),
            },
        );
        Ok(())
    }

    fn append(&self, study_id: &str, session_id: &str, event: &SessionEvent) -> Result<(), StoreError> {
        let mut logs = self.logs.lock().expect("store lock");
        let log = logs
            .get_mut(&(study_id.to_string(), session_id.to_string()))
            .ok_or_else(|| StoreError::Missing(session_id.to_string()))?;
        log.events.push(event.clone());
        Ok(())
    }

    fn load(&self, study_id: &str, session_id: &str) -> Result<SessionLog, StoreError> {
        self.logs
            .lock()
            .expect("store lock")
            .get(&(study_id.to_string(), session_id.to_string()))
            .cloned()
            .ok_or_else(|| StoreError::Missing(session_id.to_string()))
    }

    fn load_all(&self) -> Result<BTreeMap<(String, String), SessionLog>, StoreError> {
        Ok(self.logs.lock().expect("store lock").clone())
    }
}

/// One line-delimited file per session at `<root>/<study>/<session>.jsonl`.
#[derive(Debug)]
pub struct JsonlStore {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl JsonlStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    fn path(&self, study_id: &str, session_id: &str) -> PathBuf {
        self.root.join(study_id).join(format!("{session_id}.jsonl"))
    }

    fn read(path: &Path) -> Result<SessionLog, StoreError> {
        let f = File::open(path).map_err(io_err(path))?;
        SessionLog::read_from(BufReader::new(f)).map_err(|source| StoreError::Log {
            path: path.display().to_string(),
            source,
        })
    }
}

impl SessionStore for JsonlStore {
    fn create(&self, study_id: &str, header: &SessionHeader) -> Result<(), StoreError> {
        let path = self.path(study_id, &header.session_id);
        let dir = path.parent().expect("session files live in a study dir");
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => StoreError::Exists(header.session_id.clone()),
                _ => io_err(&path)(e),
            })?;
        let log = SessionLog {
            header: header.clone(),
            events: Vec::new(),
        };
        log.write_to(&mut f).map_err(io_err(&path))?;
        f.sync_all().map_err(io_err(&path))
    }

    fn append(&self, study_id: &str, session_id: &str, event: &SessionEvent) -> Result<(), StoreError> {
        let path = self.path(study_id, session_id);
        let mut f = OpenOptions::new().append(true).open(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::Missing(session_id.to_string()),
            _ => io_err(&path)(e),
        })?;
        let mut line = Vec::new();
        write_event(&mut line, event).map_err(io_err(&path))?;
        f.write_all(&line).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }

    fn load(&self, study_id: &str, session_id: &str) -> Result<SessionLog, StoreError> {
        let path = self.path(study_id, session_id);
        if !path.exists() {
            return Err(StoreError::Missing(session_id.to_string()));
        }
        Self::read(&path)
    }

    fn load_all(&self) -> Result<BTreeMap<(String, String), SessionLog>, StoreError> {
        let mut out = BTreeMap::new();
        let mut studies: Vec<PathBuf> = fs::read_dir(&self.root)
            .map_err(io_err(&self.root))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        studies.sort();
        for dir in studies {
            let study = dir.file_name().unwrap_or_default().to_string_lossy().to_string();
            for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let path = entry.map_err(io_err(&dir))?.path();
                if path.extension().is_some_and(|e| e == "jsonl") {
                    let log = Self::read(&path)?;
                    out.insert((study.clone(), log.header.session_id.clone()), log);
                }
            }
        }
        Ok(out)
    }
}
