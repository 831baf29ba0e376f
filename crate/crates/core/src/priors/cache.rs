use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PriorError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheKind {
    Mcqa,
    Describe,
    Embed,
    Toggle,
    Lgbu,
}

impl CacheKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheKind::Mcqa => "mcqa",
            CacheKind::Describe => "describe",
            CacheKind::Embed => "embed",
            CacheKind::Toggle => "toggle",
            CacheKind::Lgbu => "lgbu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
}

/// One cached provider response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key_hash: String,
    pub kind: CacheKind,
    pub model: String,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<Vec<TokenLogprob>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
    #[serde(default)]
    pub timestamp: u64,
}

/// SHA-256 over kind, model and prompt, separated by NUL bytes.
pub fn cache_key(kind: CacheKind, model: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_str().as_bytes());
    h.update([0u8]);
    h.update(model.as_bytes());
    h.update([0u8]);
    h.update(prompt.as_bytes());
    hex::encode(h.finalize())
}

struct CacheState {
    records: HashMap<String, CacheRecord>,
    file: Option<std::fs::File>,
}

/// Append-only JSON-lines response cache. Later lines win on duplicate keys.
pub struct PriorCache {
    path: Option<PathBuf>,
    state: Mutex<CacheState>,
}

impl PriorCache {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            state: Mutex::new(CacheState {
                records: HashMap::new(),
                file: None,
            }),
        }
    }

    /// Loads `path` if it exists. With `writable`, new records are appended.
    pub fn open(path: impl AsRef<Path>, writable: bool) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut records = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(std::fs::File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| PriorError::Cache(format!("{}:{}: {e}", path.display(), i + 1)))?;
                records.insert(rec.key_hash.clone(), rec);
            }
        } else if !writable {
            return Err(PriorError::Cache(format!("cache file {} does not exist", path.display())));
        }
        let file = if writable {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Some(OpenOptions::new().create(true).append(true).open(&path)?)
        } else {
            None
        };
        Ok(Self {
            path: Some(path),
            state: Mutex::new(CacheState { records, file }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cache lock").records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<CacheRecord> {
        self.state.lock().expect("cache lock").records.get(key).cloned()
    }

    /// Stores a record; the first record for a key is kept.
    pub fn insert(&self, record: CacheRecord) -> Result<()> {
        let mut state = self.state.lock().expect("cache lock");
        if state.records.contains_key(&record.key_hash) {
            return Ok(());
        }
        if let Some(file) = state.file.as_mut() {
            let mut line = serde_json::to_string(&record)?;
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        state.records.insert(record.key_hash.clone(), record);
        Ok(())
    }

    /// All records sorted by key, for stable dumps.
    pub fn records(&self) -> Vec<CacheRecord> {
        let state = self.state.lock().expect("cache lock");
        let mut out: Vec<CacheRecord> = state.records.values().cloned().collect();
        out.sort_by(|a, b| a.key_hash.cmp(&b.key_hash));
        out
    }
}
