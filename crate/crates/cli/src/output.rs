//! Artifact writers. Every report is `{command, version, config, result}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    result: &'a T,
}

pub struct Sink<'a> {
    pub cfg: &'a ExperimentConfig,
    pub command: &'static str,
    pub written: Vec<PathBuf>,
}

impl<'a> Sink<'a> {
    pub fn new(cfg: &'a ExperimentConfig, command: &'static str) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Sink {
            cfg,
            command,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    /// Writes the JSON report, or the CSV table when the format is CSV.
    pub fn emit<T: Serialize, R: Serialize>(&mut self, result: &T, table: &[R]) -> Result<(), CliError> {
        match self.cfg.format {
            Format::Json => {
                let env = Envelope {
                    command: self.command,
                    version: env!("CARGO_PKG_VERSION"),
                    config: self.cfg,
                    result,
                };
                let path = self.path(&format!("{}.json", self.command));
                write_json(&path, &env)?;
                self.written.push(path);
            }
            Format::Csv => {
                let path = self.path(&format!("{}.csv", self.command));
                write_csv(&path, table)?;
                self.written.push(path);
            }
        }
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, body)?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
