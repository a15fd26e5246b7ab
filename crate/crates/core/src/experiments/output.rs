//! CSV tables and the JSON run manifest.
//!
//! CSVs are UTF-8 with a header row and `.` as decimal separator. Floats
//! are written in shortest round-trip form, so identical runs produce
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiments::config::SystemConfig;
use crate::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Write `rows` to `dir/name` and return the path.
pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut writer = csv::Writer::from_writer(file);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(io_err(&path))?;
    Ok(path)
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub crate_name: &'static str,
    pub crate_version: &'static str,
    pub scenario: &'a str,
    pub seed: u64,
    pub trials: usize,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
    pub config: &'a SystemConfig,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'a str, config: &'a SystemConfig) -> Self {
        Self {
            command,
            crate_name: env!("CARGO_PKG_NAME"),
            crate_version: env!("CARGO_PKG_VERSION"),
            scenario: &config.name,
            seed: config.seed,
            trials: config.trials,
            outputs: Vec::new(),
            summary: serde_json::Value::Null,
            config,
        }
    }

    /// Write to `dir/<command>.manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
        Ok(path)
    }
}
