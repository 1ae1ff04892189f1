//! Append-only JSON-lines cache of per-shape fractions (`*.lel.jsonl`).

use std::collections::{BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sieve::shape_classes;

/// Written into every record; records from other versions are recomputed.
pub const ENGINE_VERSION: &str = concat!("lel-", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub shape_key: String,
    pub ell: usize,
    pub multiplicity: u64,
    /// `PiPoly` text, absent for numeric-only sweeps.
    pub exact: Option<String>,
    pub numeric: String,
    /// Bits of the arithmetic behind `numeric`.
    pub precision: u32,
    pub engine_version: String,
}

#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    file: File,
    records: HashMap<String, CacheRecord>,
    /// Lines shadowed by a later line with the same key.
    superseded: usize,
}

impl Store {
    /// Opens or creates a cache. A malformed line is an error unless
    /// `lenient`, in which case it is logged and skipped.
    pub fn open(path: impl AsRef<Path>, lenient: bool) -> Result<Store> {
        let path = path.as_ref().to_path_buf();
        let mut records = HashMap::new();
        let mut superseded = 0;
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(r) => {
                        if records.insert(r.shape_key.clone(), r).is_some() {
                            superseded += 1;
                        }
                    }
                    Err(e) if lenient => log::warn!("{}: skipping corrupt line {}: {e}", path.display(), i + 1),
                    Err(e) => return Err(Error::CorruptRecord { line: i + 1, message: e.to_string() }),
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let store = Store { path, file, records, superseded };
        let stale = store.stale_count();
        if stale > 0 {
            log::warn!("{}: {stale} record(s) from another engine version will be recomputed", store.path.display());
        }
        Ok(store)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of records whose engine version differs from this build.
    pub fn stale_count(&self) -> usize {
        self.records.values().filter(|r| r.engine_version != ENGINE_VERSION).count()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes one line and flushes it; a later record for the same key wins.
    pub fn append(&mut self, r: CacheRecord) -> Result<()> {
        let mut line = serde_json::to_string(&r)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        if self.records.insert(r.shape_key.clone(), r).is_some() {
            self.superseded += 1;
        }
        Ok(())
    }

    /// Exact-match lookup, whatever the engine version.
    pub fn lookup(&self, shape_key: &str) -> Option<&CacheRecord> {
        self.records.get(shape_key)
    }

    /// Lookup restricted to records written by this engine version.
    pub fn lookup_current(&self, shape_key: &str) -> Option<&CacheRecord> {
        self.lookup(shape_key).filter(|r| r.engine_version == ENGINE_VERSION)
    }

    /// Shape keys with `ℓ ≤ max_len` that have no current record.
    pub fn resume_sweep(&self, max_len: usize) -> BTreeSet<String> {
        shape_classes(max_len)
            .into_iter()
            .map(|c| c.key.encode())
            .filter(|k| self.lookup_current(k).is_none())
            .collect()
    }

    /// Rewrites the file with one line per key if any line is shadowed.
    /// The new file replaces the old one by rename.
    pub fn compact(&mut self) -> Result<()> {
        if self.superseded == 0 {
            return Ok(());
        }
        let mut keys: Vec<&String> = self.records.keys().collect();
        keys.sort();
        let tmp = self.path.with_extension("jsonl.tmp");
        {
            let mut w = std::io::BufWriter::new(File::create(&tmp)?);
            for k in keys {
                serde_json::to_writer(&mut w, &self.records[k])?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, &self.path)?;
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        self.superseded = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(key: &str) -> CacheRecord {
        CacheRecord {
            shape_key: key.into(),
            ell: 2,
            multiplicity: 4,
            exact: Some("1/8".into()),
            numeric: "0.125".into(),
            precision: 256,
            engine_version: ENGINE_VERSION.into(),
        }
    }

    #[test]
    fn append_then_lookup() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.lel.jsonl");
        let mut s = Store::open(&path, false).unwrap();
        s.append(record("0,0;1,0")).unwrap();
        assert_eq!(s.lookup("0,0;1,0"), Some(&record("0,0;1,0")));
        drop(s);
        let s = Store::open(&path, false).unwrap();
        assert_eq!(s.lookup("0,0;1,0"), Some(&record("0,0;1,0")));
        assert_eq!(s.lookup("0,0;0,1"), None);
    }

    #[test]
    fn corrupt_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.lel.jsonl");
        let good = serde_json::to_string(&record("a")).unwrap();
        std::fs::write(&path, format!("{good}\n{{not json\n{good}\n")).unwrap();
        match Store::open(&path, false) {
            Err(Error::CorruptRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(Store::open(&path, true).unwrap().len(), 1);
    }

    #[test]
    fn stale_versions_are_pending() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.lel.jsonl");
        let mut s = Store::open(&path, false).unwrap();
        let mut old = record("0,0;1,0");
        old.engine_version = "lel-0.0.0".into();
        s.append(old).unwrap();
        let s = Store::open(&path, false).unwrap();
        assert_eq!(s.stale_count(), 1);
        assert!(s.lookup_current("0,0;1,0").is_none());
        assert!(s.resume_sweep(2).contains("0,0;1,0"));
    }

    #[test]
    fn compaction_keeps_keys_unique() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.lel.jsonl");
        let mut s = Store::open(&path, false).unwrap();
        s.append(record("a")).unwrap();
        s.append(record("b")).unwrap();
        let mut newer = record("a");
        newer.numeric = "0.25".into();
        s.append(newer.clone()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        s.compact().unwrap();
        s.append(record("c")).unwrap();
        drop(s);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        let s = Store::open(&path, false).unwrap();
        assert_eq!(s.lookup("a"), Some(&newer));
        assert_eq!(s.len(), 3);
    }
}
