//! JSON artifact persistence with format headers.
//!
//! Every artifact carries a `format` tag and `version` so that stale or
//! mismatched files fail loudly instead of deserializing into nonsense.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut bytes = serde_json::to_vec(value).expect("artifact serialization");
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads a JSON artifact; a missing file reports the pipeline stage that
/// would have produced it.
pub fn load_json<T: DeserializeOwned>(path: &Path, stage: &'static str) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact {
                stage,
                path: path.to_path_buf(),
            }
        } else {
            Error::io(path, e)
        }
    })?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn check_format(path: &Path, expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ArtifactFormat {
            path: path.to_path_buf(),
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

/// Opens a required input file, reporting the stage that produces it when
/// missing.
pub fn open_required(path: &Path, stage: &'static str) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact {
                stage,
                path: path.to_path_buf(),
            }
        } else {
            Error::io(path, e)
        }
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn artifact_path(dir: &Path, config_hash: &str, name: &str) -> PathBuf {
    dir.join(config_hash).join(name)
}
