//! CSV tables with `#` metadata headers and the per-run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named pass/fail flag with the measured value and its tolerance.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value ≥ tolerance`.
    pub fn at_least(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }

    pub fn flag(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Output directory of one command.
pub struct RunDir {
    dir: PathBuf,
    command: &'static str,
    header: Vec<String>,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(dir: &Path, command: &'static str, cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut header = vec![format!("dirac1d {VERSION}"), format!("command = {command}")];
        header.extend(cfg.flatten().into_iter().map(|(k, v)| format!("{k} = {v}")));
        Ok(RunDir {
            dir: dir.to_path_buf(),
            command,
            header,
            files: Vec::new(),
        })
    }

    /// Writes `name` with the metadata header, a column row and `rows`.
    pub fn table(&mut self, name: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut body = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut body);
            w.write_record(columns)?;
            for row in rows {
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        let mut text = String::new();
        for line in &self.header {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(std::str::from_utf8(&body)?);
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.txt` and returns whether every check passed.
    pub fn finish(self, checks: &[Check], results: &[(String, String)]) -> Result<bool> {
        let mut text = String::new();
        text.push_str(&format!("version = {VERSION}\ncommand = {}\n", self.command));
        for line in self.header.iter().skip(2) {
            text.push_str(&format!("config.{line}\n"));
        }
        for (k, v) in results {
            text.push_str(&format!("result.{k} = {v}\n"));
        }
        for c in checks {
            text.push_str(&format!(
                "check.{} = {} value={} tolerance={}\n",
                c.name,
                c.flag(),
                num(c.value),
                num(c.tolerance)
            ));
        }
        let pass = checks.iter().all(|c| c.pass);
        text.push_str(&format!("status = {}\n", if pass { "PASS" } else { "FAIL" }));
        text.push_str(&format!("files = {}\n", self.files.join(", ")));
        let path = self.dir.join("manifest.txt");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        for c in checks {
            println!("{}: {} (value {}, tolerance {})", c.name, c.flag(), num(c.value), num(c.tolerance));
        }
        println!("{} {} -> {}", self.command, if pass { "PASS" } else { "FAIL" }, self.dir.display());
        Ok(pass)
    }
}

/// Shortest round-trip formatting of a float.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
