use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use belief_core::session::SessionDocument;
use serde::Serialize;

/// Writes `contents`, creating parent directories.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(path, s)
}

/// A session file that could not be used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileError {
    pub path: PathBuf,
    pub message: String,
}

/// The directory holding session files: `dir/sessions` if present,
/// otherwise `dir` itself.
pub fn sessions_dir(dir: &Path) -> PathBuf {
    let nested = dir.join("sessions");
    if nested.is_dir() {
        nested
    } else {
        dir.to_path_buf()
    }
}

const NOT_SESSIONS: [&str; 2] = ["manifest.json", "index.json"];

/// Parsed sessions with their paths, and the files that failed.
pub type Loaded = (Vec<(PathBuf, SessionDocument)>, Vec<FileError>);

/// Reads every `*.json` session in the sessions directory, sorted by file
/// name. Unreadable or invalid files are returned as errors alongside the
/// good ones.
pub fn load_sessions(dir: &Path) -> Result<Loaded> {
    let dir = sessions_dir(dir);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .filter(|p| !p.file_name().is_some_and(|n| NOT_SESSIONS.iter().any(|s| n == *s)))
        .collect();
    paths.sort();

    let mut docs = Vec::new();
    let mut errors = Vec::new();
    for path in paths {
        let parsed = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|s| SessionDocument::from_json(&s).map_err(|e| e.to_string()));
        match parsed {
            Ok(doc) => docs.push((path, doc)),
            Err(message) => errors.push(FileError { path, message }),
        }
    }
    Ok((docs, errors))
}
