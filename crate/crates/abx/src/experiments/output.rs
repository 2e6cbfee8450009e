use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Writes `rows` with a header row and returns the number of data rows.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<usize> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(rows.len())
}

/// Reads every row of a CSV file written by [`write_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader.deserialize().map(|r| r.map_err(csv_err)).collect()
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e.into()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Creates `dir` and its parents.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// A file written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub rows: usize,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub config: serde_json::Value,
    pub files: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, seed: Option<u64>, threads: usize, config: &C) -> Self {
        Self {
            command: command.to_string(),
            version: version_string(),
            seed,
            threads,
            wall_clock_seconds: 0.0,
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            files: Vec::new(),
        }
    }

    pub fn record(&mut self, name: &str, rows: usize) {
        self.files.push(OutputFile {
            name: name.to_string(),
            rows,
        });
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.wall_clock_seconds = elapsed.as_secs_f64();
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("run.json");
        write_json(&path, self)?;
        Ok(path)
    }
}

/// `abx v<version>`, with the commit appended when the build recorded one.
pub fn version_string() -> String {
    match option_env!("ABX_GIT_REV") {
        Some(rev) if !rev.is_empty() => format!("abx v{}-{rev}", env!("CARGO_PKG_VERSION")),
        _ => format!("abx v{}", env!("CARGO_PKG_VERSION")),
    }
}
