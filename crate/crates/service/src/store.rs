//! Project persistence: one canonical project file per id plus a revision
//! sidecar, both replaced atomically by rename.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use rusforge_core::project_file::{load_project, save_project};
use rusforge_core::Project;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub project: Project,
    pub revision: u64,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no project {0:?}")]
    NotFound(String),
    #[error("project {0:?} already exists")]
    Exists(String),
    #[error("stale revision {expected}; current revision is {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Ids double as file names.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub struct Store {
    dir: PathBuf,
    projects: RwLock<BTreeMap<String, Entry>>,
}

impl Store {
    /// Loads every `<id>.json` under `dir`, creating the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut projects = BTreeMap::new();
        for item in fs::read_dir(&dir)? {
            let path = item?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).filter(|s| is_valid_id(s)) else {
                continue;
            };
            let corrupt = |message: String| StoreError::Corrupt {
                path: path.clone(),
                message,
            };
            let project = load_project(&fs::read(&path)?).map_err(|e| corrupt(e.to_string()))?;
            let revision = match fs::read_to_string(rev_path(&dir, id)) {
                Ok(text) => text
                    .trim()
                    .parse()
                    .map_err(|_| corrupt(format!("bad revision sidecar {:?}", text.trim())))?,
                Err(e) if e.kind() == io::ErrorKind::NotFound => 1,
                Err(e) => return Err(e.into()),
            };
            projects.insert(id.to_string(), Entry { project, revision });
        }
        Ok(Store {
            dir,
            projects: RwLock::new(projects),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn list(&self) -> Vec<(String, Entry)> {
        let map = self.projects.read().expect("store lock");
        map.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    pub fn get(&self, id: &str) -> Result<Entry, StoreError> {
        let map = self.projects.read().expect("store lock");
        map.get(id).cloned().ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    pub fn create(&self, id: &str, mut project: Project) -> Result<Entry, StoreError> {
        let mut map = self.projects.write().expect("store lock");
        if map.contains_key(id) {
            return Err(StoreError::Exists(id.to_string()));
        }
        project.canonicalize();
        let entry = Entry { project, revision: 1 };
        self.persist(id, &entry)?;
        map.insert(id.to_string(), entry.clone());
        Ok(entry)
    }

    /// Applies `change` to the current project if `expected` (when given)
    /// is the current revision. The revision grows by one per accepted change.
    pub fn update<E>(
        &self,
        id: &str,
        expected: Option<u64>,
        change: impl FnOnce(&mut Project) -> Result<(), E>,
    ) -> Result<Result<Entry, E>, StoreError> {
        let mut map = self.projects.write().expect("store lock");
        let current = map.get(id).ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        if let Some(expected) = expected {
            if expected != current.revision {
                return Err(StoreError::Conflict {
                    expected,
                    current: current.revision,
                });
            }
        }
        let mut project = current.project.clone();
        if let Err(e) = change(&mut project) {
            return Ok(Err(e));
        }
        project.canonicalize();
        let entry = Entry {
            project,
            revision: current.revision + 1,
        };
        self.persist(id, &entry)?;
        map.insert(id.to_string(), entry.clone());
        Ok(Ok(entry))
    }

    pub fn delete(&self, id: &str) -> Result<(), StoreError> {
        let mut map = self.projects.write().expect("store lock");
        if map.remove(id).is_none() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        fs::remove_file(self.dir.join(format!("{id}.json")))?;
        match fs::remove_file(rev_path(&self.dir, id)) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => Err(e.into()),
            _ => Ok(()),
        }
    }

    fn persist(&self, id: &str, entry: &Entry) -> io::Result<()> {
        write_atomic(&self.dir.join(format!("{id}.json")), &save_project(&entry.project))?;
        write_atomic(&rev_path(&self.dir, id), format!("{}\n", entry.revision).as_bytes())
    }
}

fn rev_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.rev"))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}
