//! Output directory with CSV, JSON and SVG writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::svg::Plot;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::Io { path: root.clone(), source: e })?;
        Ok(OutputDir { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.root.join(name);
        self.written.push(p.clone());
        p
    }

    /// Header row followed by preformatted records.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.path(name);
        let err = |e| CliError::Csv { path: path.clone(), source: e };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Io { path: path.clone(), source: e })?;
        Ok(())
    }

    /// All-numeric table.
    pub fn csv_numeric(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| num(*x)).collect()).collect();
        self.csv(name, header, &rows)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Json { path: path.clone(), source: e })?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::Io { path, source: e })
    }

    pub fn svg(&mut self, name: &str, plot: &Plot) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, plot.render()).map_err(|e| CliError::Io { path, source: e })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.718281828459045e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{s}");
        }
    }
}
