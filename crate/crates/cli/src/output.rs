//! Output files. CSV and JSON bodies carry no timestamps; the run time goes
//! into `run.json` only.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{Format, OutputConfig, RunConfig};
use crate::error::CliError;

pub struct Output {
    dir: PathBuf,
    csv: bool,
    json: bool,
    written: Vec<PathBuf>,
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl Output {
    pub fn new(cfg: &OutputConfig) -> Result<Output, CliError> {
        fs::create_dir_all(&cfg.directory).map_err(|e| io_err(&cfg.directory, e))?;
        Ok(Output {
            dir: cfg.directory.clone(),
            csv: cfg.wants(Format::Csv),
            json: cfg.wants(Format::Json),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn csv<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<(), CliError> {
        if !self.csv {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        if !self.json {
            return Ok(());
        }
        self.write_json(name, value)
    }

    /// Written regardless of the requested formats.
    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn run_record(&mut self, command: &str, workers: usize, cfg: &RunConfig) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Run<'a> {
            command: &'a str,
            version: &'a str,
            unix_time: u64,
            workers: usize,
            config: &'a RunConfig,
        }
        let unix_time = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.write_json(
            "run.json",
            &Run {
                command,
                version: env!("CARGO_PKG_VERSION"),
                unix_time,
                workers,
                config: cfg,
            },
        )
    }
}
