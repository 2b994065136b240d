use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, OutputConfig};
use crate::error::CliError;

/// Real numbers in CSV: 17 significant digits, `.` decimal separator.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes artifacts into the configured directory, honouring its format list.
pub struct Sink {
    dir: PathBuf,
    csv: bool,
    json: bool,
    written: Vec<PathBuf>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.to_path_buf(), message: e.to_string() }
}

impl Sink {
    pub fn new(cfg: &OutputConfig, dir: Option<&Path>) -> Result<Self, CliError> {
        let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.directory.clone());
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self { dir, csv: cfg.wants(Format::Csv), json: cfg.wants(Format::Json), written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.json {
            return Ok(());
        }
        let path = self.dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        if !self.csv {
            return Ok(());
        }
        let path = self.dir.join(format!("{name}.csv"));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [0.1, std::f64::consts::PI, 1e-300, -2.5e17, 9f64.ln()] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
    }
}
