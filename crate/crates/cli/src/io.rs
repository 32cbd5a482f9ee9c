use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use auxsel_core::{Dag, SampleMatrix};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Fails with an IO error unless every path names a readable file.
pub fn require_inputs(paths: &[&Path]) -> Result<(), CliError> {
    for path in paths {
        if !path.is_file() {
            return Err(CliError::Io(format!("{}: no such file", path.display())));
        }
    }
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<Dag, CliError> {
    Dag::from_json(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn read_samples(path: &Path) -> Result<SampleMatrix, CliError> {
    SampleMatrix::from_csv(&read_text(path)?).map_err(|e| CliError::input(path, e))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = parent_dir(path);
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Writes a set of files into `dir`. All files are staged in a temporary
/// directory first; a fresh `dir` appears in one rename, an existing one has
/// each file replaced atomically.
pub fn write_bundle(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    let parent = parent_dir(dir);
    fs::create_dir_all(&parent).map_err(io_err)?;
    let staging = tempfile::Builder::new().prefix(".bundle").tempdir_in(&parent).map_err(io_err)?;
    for (name, contents) in files {
        fs::write(staging.path().join(name), contents).map_err(io_err)?;
    }
    if !dir.exists() {
        let staged = staging.keep();
        return fs::rename(&staged, dir).map_err(io_err);
    }
    for (name, _) in files {
        fs::rename(staging.path().join(name), dir.join(name)).map_err(io_err)?;
    }
    Ok(())
}
