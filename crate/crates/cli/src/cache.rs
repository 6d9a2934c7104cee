//! Append-only results cache: one JSON object per line, keyed by
//! `(k, n, window, budget)`.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use gridpat::SolveResult;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_CACHE: &str = "gridpat/cache/v1";

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheLine {
    pub schema: String,
    pub k: usize,
    pub n: usize,
    pub window: usize,
    pub budget: u64,
    pub result: SolveResult,
}

/// Entries of one cache file that match a `(k, window, budget)` key.
pub struct Cache {
    path: PathBuf,
    k: usize,
    window: usize,
    budget: u64,
    entries: Vec<SolveResult>,
    written: BTreeSet<usize>,
}

impl Cache {
    /// Reads matching entries. A missing file is an empty cache; a
    /// truncated final line (interrupted write) is skipped.
    pub fn open(path: &Path, k: usize, window: usize, budget: u64) -> Result<Self, CliError> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(CliError::io(path, e)),
        };
        let complete = text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut entries = Vec::new();
        let mut written = BTreeSet::new();
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: CacheLine = match serde_json::from_str(line) {
                Ok(c) => c,
                Err(_) if i + 1 == lines.len() && !complete => continue,
                Err(e) => {
                    return Err(CliError::Parse(format!(
                        "{}: line {}: {e}",
                        path.display(),
                        i + 1
                    )))
                }
            };
            if parsed.schema != SCHEMA_CACHE {
                return Err(CliError::Parse(format!(
                    "{}: line {}: unknown schema {:?}",
                    path.display(),
                    i + 1,
                    parsed.schema
                )));
            }
            if (parsed.k, parsed.window, parsed.budget) == (k, window, budget)
                && parsed.result.n == parsed.n
                && written.insert(parsed.n)
            {
                entries.push(parsed.result);
            }
        }
        Ok(Cache { path: path.to_path_buf(), k, window, budget, entries, written })
    }

    pub fn entries(&self) -> &[SolveResult] {
        &self.entries
    }

    /// Drops an entry that failed re-verification so its recomputed value is stored again.
    pub fn forget(&mut self, n: usize) {
        self.entries.retain(|r| r.n != n);
        self.written.remove(&n);
    }

    /// Appends results whose n is not yet stored under this key.
    pub fn append<'a>(&mut self, results: impl Iterator<Item = &'a SolveResult>) -> Result<(), CliError> {
        let mut out = String::new();
        for r in results {
            if r.k != self.k || !self.written.insert(r.n) {
                continue;
            }
            let line = CacheLine {
                schema: SCHEMA_CACHE.to_string(),
                k: self.k,
                n: r.n,
                window: self.window,
                budget: self.budget,
                result: r.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
        if out.is_empty() {
            return Ok(());
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| CliError::io(&self.path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| CliError::io(&self.path, e))
    }
}
