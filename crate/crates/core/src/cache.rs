//! Append-only on-disk cache for local point counts.
//!
//! Each line is `key\tvalue\tchecksum` where the checksum is a truncated
//! SHA-256 of `key\tvalue`. Lines that fail to parse or verify are skipped
//! with a warning, so the entry is recomputed on demand.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const CHECKSUM_HEX: usize = 16;

/// Hex digest identifying an instance (form, right-hand side, cutters).
pub fn instance_hash(canonical: &str) -> String {
    hex::encode(&Sha256::digest(canonical.as_bytes())[..16])
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub instance: String,
    pub p: u128,
    pub k: u32,
}

impl CacheKey {
    pub fn new(canonical: &str, p: u128, k: u32) -> Self {
        Self { instance: instance_hash(canonical), p, k }
    }

    fn encode(&self) -> String {
        format!("{}:{}:{}", self.instance, self.p, self.k)
    }
}

fn checksum(key: &str, value: &str) -> String {
    let digest = Sha256::digest(format!("{key}\t{value}").as_bytes());
    hex::encode(digest)[..CHECKSUM_HEX].to_string()
}

fn parse_line(line: &str) -> Option<(String, u128)> {
    let mut parts = line.split('\t');
    let (key, value, sum) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || checksum(key, value) != sum {
        return None;
    }
    Some((key.to_string(), value.parse().ok()?))
}

#[derive(Debug)]
pub struct CountCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, u128>>,
    writer: Mutex<File>,
}

impl CountCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let err = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(err)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line.map_err(err)?;
                if line.is_empty() {
                    continue;
                }
                match parse_line(&line) {
                    Some((k, v)) => {
                        entries.insert(k, v);
                    }
                    None => log::warn!(
                        "{}:{}: corrupt cache entry ignored, will recompute",
                        path.display(),
                        lineno + 1
                    ),
                }
            }
        }
        let writer = OpenOptions::new().create(true).append(true).open(&path).map_err(err)?;
        Ok(Self { path, entries: Mutex::new(entries), writer: Mutex::new(writer) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<u128> {
        self.entries.lock().unwrap().get(&key.encode()).copied()
    }

    pub fn put(&self, key: &CacheKey, value: u128) -> Result<()> {
        let k = key.encode();
        {
            let mut entries = self.entries.lock().unwrap();
            if entries.get(&k) == Some(&value) {
                return Ok(());
            }
            entries.insert(k.clone(), value);
        }
        let v = value.to_string();
        let line = format!("{k}\t{v}\t{}\n", checksum(&k, &v));
        let mut w = self.writer.lock().unwrap();
        w.write_all(line.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::Cache(format!("{}: {e}", self.path.display())))
    }

    /// Returns the cached value or computes, stores and returns it.
    pub fn get_or_compute(&self, key: &CacheKey, compute: impl FnOnce() -> Result<u128>) -> Result<u128> {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = compute()?;
        self.put(key, v)?;
        Ok(v)
    }
}
