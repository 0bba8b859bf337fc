//! File-per-assessment persistence shared by the CLI and the service.
//!
//! Layout: `<root>/rubric.json` and `<root>/assessments/<id>.json`. Writes go
//! to a temporary sibling and are renamed into place, so readers always see a
//! complete document. A `.lock` sidecar per assessment carries an advisory
//! lock: shared for reads, exclusive for the check-then-write of a commit.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assessment::{Assessment, AssessmentError};
use crate::bundled;
use crate::rubric::{Rubric, RubricError};

pub const RUBRIC_FILE: &str = "rubric.json";
pub const ASSESSMENT_DIR: &str = "assessments";

/// Opaque revision token: the SHA-256 of the stored document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VersionToken(pub String);

impl VersionToken {
    pub fn of(content: &[u8]) -> Self {
        VersionToken(hex::encode(Sha256::digest(content)))
    }
}

impl std::fmt::Display for VersionToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("no assessment named `{0}`")]
    NotFound(String),
    #[error("`{0}` is not a valid assessment id (use lowercase letters, digits, `-` and `_`)")]
    InvalidId(String),
    #[error("assessment `{id}` changed since revision {expected}; current revision is {current}")]
    Conflict {
        id: String,
        expected: VersionToken,
        current: VersionToken,
    },
    #[error("{path}: {source}")]
    Rubric { path: PathBuf, source: RubricError },
    #[error("{path}: {source}")]
    Assessment { path: PathBuf, source: AssessmentError },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let rubric = root.join(RUBRIC_FILE);
        fs::metadata(&rubric).map_err(io_err(&rubric))?;
        Ok(Store { root })
    }

    /// Writes the bundled rubric and assessments under `root`, creating it if needed.
    pub fn init_bundled(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let dir = root.join(ASSESSMENT_DIR);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        atomic_write(&root.join(RUBRIC_FILE), bundled::RUBRIC_JSON.as_bytes())?;
        for (slug, doc) in bundled::ASSESSMENTS {
            atomic_write(&dir.join(format!("{slug}.json")), doc.as_bytes())?;
        }
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn rubric(&self) -> Result<Rubric, StoreError> {
        let path = self.root.join(RUBRIC_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Rubric::parse(&text).map_err(|source| StoreError::Rubric { path, source })
    }

    pub fn assessment_path(&self, id: &str) -> Result<PathBuf, StoreError> {
        check_id(id)?;
        Ok(self.root.join(ASSESSMENT_DIR).join(format!("{id}.json")))
    }

    /// Ids of stored assessments, sorted.
    pub fn list(&self) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join(ASSESSMENT_DIR);
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(&dir)(e)),
        };
        let mut ids = Vec::new();
        for entry in entries {
            let name = entry.map_err(io_err(&dir))?.file_name();
            let name = name.to_string_lossy();
            if let Some(id) = name.strip_suffix(".json") {
                if check_id(id).is_ok() {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Raw document and its token, read under a shared lock.
    pub fn read_raw(&self, id: &str) -> Result<(String, VersionToken), StoreError> {
        let path = self.assessment_path(id)?;
        let _lock = self.lock(id, false)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let token = VersionToken::of(text.as_bytes());
        Ok((text, token))
    }

    pub fn read(&self, id: &str, rubric: &Rubric) -> Result<(Assessment, VersionToken), StoreError> {
        let (text, token) = self.read_raw(id)?;
        let path = self.assessment_path(id)?;
        let a = Assessment::parse(&text, rubric.scale()).map_err(|source| StoreError::Assessment { path, source })?;
        Ok((a, token))
    }

    /// Commits `assessment` if the stored revision still matches `expected`.
    /// `None` skips the check. Returns the new token.
    pub fn write(
        &self,
        id: &str,
        assessment: &Assessment,
        expected: Option<&VersionToken>,
    ) -> Result<VersionToken, StoreError> {
        let path = self.assessment_path(id)?;
        let _lock = self.lock(id, true)?;
        if let Some(expected) = expected {
            let current = match fs::read(&path) {
                Ok(bytes) => VersionToken::of(&bytes),
                Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
                Err(e) => return Err(io_err(&path)(e)),
            };
            if &current != expected {
                return Err(StoreError::Conflict {
                    id: id.to_string(),
                    expected: expected.clone(),
                    current,
                });
            }
        }
        let text = assessment.to_canonical_json();
        atomic_write(&path, text.as_bytes())?;
        Ok(VersionToken::of(text.as_bytes()))
    }

    fn lock(&self, id: &str, exclusive: bool) -> Result<LockGuard, StoreError> {
        let dir = self.root.join(ASSESSMENT_DIR);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(format!(".{id}.lock"));
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(io_err(&path))?;
        if exclusive {
            file.lock().map_err(io_err(&path))?;
        } else {
            file.lock_shared().map_err(io_err(&path))?;
        }
        Ok(LockGuard(file))
    }
}

struct LockGuard(File);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && !id.starts_with(['-', '_'])
        && id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

/// Writes to a temporary sibling, syncs, then renames over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}
