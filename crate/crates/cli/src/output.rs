//! CSV tables and run summaries.
//!
//! Every file starts with a `# generated_at=` line, the only line that
//! differs between two runs of the same configuration. CSV uses `.` as the
//! decimal separator, `\n` line endings and a fixed column order; floats
//! are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::CliError;

fn timestamp_line() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("# generated_at=unix:{secs}\n")
}

pub struct Table {
    pub name: String,
    /// What the table tabulates, written as a comment line.
    pub object: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, object: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            object: object.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        let mut file = fs::File::create(&path)?;
        file.write_all(timestamp_line().as_bytes())?;
        file.write_all(format!("# {}\n", self.object).as_bytes())?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn flag(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

#[derive(Debug, Default)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
    pub assertions: Vec<(String, bool)>,
}

impl Summary {
    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn check(&mut self, name: &str, ok: bool) {
        self.assertions.push((name.to_string(), ok));
    }

    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|(_, ok)| *ok)
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{name}_summary.txt"));
        let mut text = timestamp_line();
        for (k, v) in &self.entries {
            text.push_str(&format!("{k}={v}\n"));
        }
        for (k, ok) in &self.assertions {
            text.push_str(&format!("assert.{k}={}\n", flag(*ok)));
        }
        text.push_str(&format!("status={}\n", flag(self.all_pass())));
        fs::write(&path, text)?;
        Ok(path)
    }
}
