//! Output files with embedded config hashes and replay detection.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct OutDir {
    dir: Option<PathBuf>,
    hash: String,
}

impl OutDir {
    pub fn new(dir: Option<PathBuf>, hash: &str) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Self {
            dir,
            hash: hash.to_string(),
        })
    }

    /// Writes a file with the config hash on the first line.  Refuses to
    /// overwrite a file written under a different config: a replay with
    /// modified inputs must not silently mix outputs.
    pub fn write(&self, name: &str, body: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let path = dir.join(name);
        self.check_replay(&path)?;
        let mut f = std::fs::File::create(&path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        writeln!(f, "# config_sha256 = {}", self.hash)
            .and_then(|_| f.write_all(body.as_bytes()))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(Some(path))
    }

    fn check_replay(&self, path: &Path) -> Result<(), CliError> {
        let Ok(existing) = std::fs::read_to_string(path) else {
            return Ok(());
        };
        if let Some(first) = existing.lines().next() {
            if let Some(old) = first.strip_prefix("# config_sha256 = ") {
                if old != self.hash {
                    return Err(CliError::Config(format!(
                        "replay mismatch: {} was produced by config {}, current config is {}",
                        path.display(),
                        old,
                        self.hash
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Shortest-roundtrip float formatting; deterministic across runs.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}
