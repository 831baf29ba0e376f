use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cache::{cache_key, CacheKind, CacheRecord, PriorCache, TokenLogprob};
use super::http::HttpModel;
use super::mcqa::McqaLevel;
use super::mock::MockModel;
use super::{PriorError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    Live,
    Replay,
    Mock,
}

impl std::str::FromStr for ProviderMode {
    type Err = PriorError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(Self::Live),
            "replay" => Ok(Self::Replay),
            "mock" => Ok(Self::Mock),
            other => Err(PriorError::Query(format!("unknown provider mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    /// Base URL of an OpenAI-compatible API, without the trailing route.
    pub endpoint: String,
    pub model: String,
    pub embedding_model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub cache_path: Option<PathBuf>,
    pub attempts: u32,
    pub backoff_ms: u64,
    pub timeout_s: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            mode: ProviderMode::Mock,
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            embedding_model: "text-embedding-3-small".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            cache_path: None,
            attempts: 3,
            backoff_ms: 500,
            timeout_s: 60,
        }
    }
}

impl ProviderConfig {
    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// One chat-completions style request.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub system: Option<String>,
    pub user: String,
    pub max_tokens: u32,
    pub logprobs: bool,
}

impl ChatRequest {
    /// Single next token with the top logprobs.
    pub fn logprob_query(system: Option<String>, user: String) -> Self {
        Self {
            system,
            user,
            max_tokens: 1,
            logprobs: true,
        }
    }

    pub fn text(system: Option<String>, user: String, max_tokens: u32) -> Self {
        Self {
            system,
            user,
            max_tokens,
            logprobs: false,
        }
    }

    /// Full prompt text used for cache keys.
    pub fn full_prompt(&self) -> String {
        match &self.system {
            Some(sys) => format!("{sys}\n\n{}", self.user),
            None => self.user.clone(),
        }
    }
}

/// Structured meaning of a request, so mock backends answer without
/// parsing prompt text. Live backends ignore it.
#[derive(Debug, Clone, PartialEq)]
pub enum Intent {
    Mcqa {
        object: String,
        level: McqaLevel,
        /// Room of the options at the surface level.
        room: Option<String>,
        labels: Vec<String>,
    },
    Describe {
        object: String,
    },
    Embed {
        object: String,
    },
    Toggle {
        object: String,
    },
    Lgbu {
        object: String,
        labels: Vec<String>,
        current: Vec<f64>,
        /// Option index of the inspected location, if it is among the options.
        inspected: Option<usize>,
        visibility: f64,
        found: bool,
        co_detected: Vec<String>,
    },
}

/// A language-model backend.
pub trait LanguageModel: Send + Sync {
    fn id(&self) -> String;

    /// Top log-probabilities of the single next token.
    fn top_logprobs(&self, req: &ChatRequest, intent: &Intent) -> Result<Vec<(String, f64)>>;

    fn complete(&self, req: &ChatRequest, intent: &Intent) -> Result<String>;

    fn embed(&self, text: &str, intent: &Intent) -> Result<Vec<f64>>;
}

/// Backend plus response cache. Replay answers only from the cache; live
/// and mock consult the cache first and record every new response.
pub struct Provider {
    mode: ProviderMode,
    model_id: String,
    backend: Option<Arc<dyn LanguageModel>>,
    cache: PriorCache,
    backend_calls: AtomicUsize,
}

fn now_secs() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// The configured model if the cache knows it, otherwise the cache's only
/// model (so a cache recorded by the mock replays without extra flags).
fn replay_model(cache: &PriorCache, configured: &str) -> String {
    let models: std::collections::BTreeSet<String> = cache.records().into_iter().map(|r| r.model).collect();
    if models.len() == 1 && !models.contains(configured) {
        models.into_iter().next().expect("one model")
    } else {
        configured.to_string()
    }
}

impl Provider {
    pub fn from_config(config: &ProviderConfig, mock: Option<MockModel>) -> Result<Self> {
        let cache = match (&config.cache_path, config.mode) {
            (Some(p), ProviderMode::Replay) => PriorCache::open(p, false)?,
            (Some(p), _) => PriorCache::open(p, true)?,
            (None, ProviderMode::Replay) => {
                return Err(PriorError::Cache("replay mode needs a cache file".into()));
            }
            (None, _) => PriorCache::in_memory(),
        };
        let backend: Option<Arc<dyn LanguageModel>> = match config.mode {
            ProviderMode::Live => Some(Arc::new(HttpModel::from_config(config)?)),
            ProviderMode::Mock => Some(Arc::new(mock.unwrap_or_default())),
            ProviderMode::Replay => None,
        };
        let model_id = match config.mode {
            ProviderMode::Mock => backend.as_ref().map(|b| b.id()).unwrap_or_default(),
            ProviderMode::Live => config.model.clone(),
            ProviderMode::Replay => replay_model(&cache, &config.model),
        };
        Ok(Self {
            mode: config.mode,
            model_id,
            backend,
            cache,
            backend_calls: AtomicUsize::new(0),
        })
    }

    /// Mock backend with an in-memory cache.
    pub fn mock(model: MockModel) -> Self {
        let id = model.id();
        Self {
            mode: ProviderMode::Mock,
            model_id: id,
            backend: Some(Arc::new(model)),
            cache: PriorCache::in_memory(),
            backend_calls: AtomicUsize::new(0),
        }
    }

    /// Any backend over an existing cache, recording new responses.
    pub fn with_backend(mode: ProviderMode, backend: Arc<dyn LanguageModel>, cache: PriorCache) -> Self {
        Self {
            mode,
            model_id: backend.id(),
            backend: Some(backend),
            cache,
            backend_calls: AtomicUsize::new(0),
        }
    }

    /// Cache-only provider answering as `model_id`.
    pub fn replay(cache: PriorCache, model_id: impl Into<String>) -> Self {
        Self {
            mode: ProviderMode::Replay,
            model_id: model_id.into(),
            backend: None,
            cache,
            backend_calls: AtomicUsize::new(0),
        }
    }

    pub fn mode(&self) -> ProviderMode {
        self.mode
    }

    pub fn id(&self) -> String {
        self.model_id.clone()
    }

    pub fn cache(&self) -> &PriorCache {
        &self.cache
    }

    /// Number of requests that reached the backend (cache misses).
    pub fn backend_calls(&self) -> usize {
        self.backend_calls.load(Ordering::Relaxed)
    }

    fn lookup(&self, kind: CacheKind, prompt: &str) -> Result<(String, Option<CacheRecord>)> {
        let key = cache_key(kind, &self.model_id, prompt);
        let hit = self.cache.get(&key);
        if hit.is_none() && self.backend.is_none() {
            return Err(PriorError::MissingPrior {
                kind: kind.as_str().into(),
                key,
                prompt: prompt.to_string(),
            });
        }
        Ok((key, hit))
    }

    fn backend(&self) -> &dyn LanguageModel {
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        self.backend.as_deref().expect("lookup guarantees a backend on a miss")
    }

    fn timestamp(&self) -> u64 {
        if self.mode == ProviderMode::Live {
            now_secs()
        } else {
            0
        }
    }

    fn record(&self, kind: CacheKind, key: String, prompt: String) -> CacheRecord {
        CacheRecord {
            key_hash: key,
            kind,
            model: self.model_id.clone(),
            prompt,
            response: None,
            logprobs: None,
            embedding: None,
            timestamp: self.timestamp(),
        }
    }

    /// Next-token logprobs and the timestamp of the response.
    pub fn logprobs(&self, kind: CacheKind, req: &ChatRequest, intent: &Intent) -> Result<(Vec<(String, f64)>, u64)> {
        let prompt = req.full_prompt();
        let (key, hit) = self.lookup(kind, &prompt)?;
        if let Some(rec) = hit {
            let lp = rec
                .logprobs
                .ok_or_else(|| PriorError::Cache(format!("entry {key} has no logprobs")))?;
            return Ok((lp.into_iter().map(|t| (t.token, t.logprob)).collect(), rec.timestamp));
        }
        let top = self.backend().top_logprobs(req, intent)?;
        let mut rec = self.record(kind, key, prompt);
        rec.logprobs = Some(
            top.iter()
                .map(|(t, l)| TokenLogprob {
                    token: t.clone(),
                    logprob: *l,
                })
                .collect(),
        );
        let ts = rec.timestamp;
        self.cache.insert(rec)?;
        Ok((top, ts))
    }

    pub fn text(&self, kind: CacheKind, req: &ChatRequest, intent: &Intent) -> Result<String> {
        let prompt = req.full_prompt();
        let (key, hit) = self.lookup(kind, &prompt)?;
        if let Some(rec) = hit {
            return rec
                .response
                .ok_or_else(|| PriorError::Cache(format!("entry {key} has no response")));
        }
        let text = self.backend().complete(req, intent)?;
        let mut rec = self.record(kind, key, prompt);
        rec.response = Some(text.clone());
        self.cache.insert(rec)?;
        Ok(text)
    }

    pub fn embedding(&self, text: &str, intent: &Intent) -> Result<Vec<f64>> {
        let (key, hit) = self.lookup(CacheKind::Embed, text)?;
        if let Some(rec) = hit {
            return rec
                .embedding
                .ok_or_else(|| PriorError::Cache(format!("entry {key} has no embedding")));
        }
        let emb = self.backend().embed(text, intent)?;
        let mut rec = self.record(CacheKind::Embed, key, text.to_string());
        rec.embedding = Some(emb.clone());
        self.cache.insert(rec)?;
        Ok(emb)
    }
}
