use std::time::Duration;

use serde_json::{json, Value};

use super::provider::{ChatRequest, Intent, LanguageModel, ProviderConfig};
use super::{PriorError, Result};

/// Client for an OpenAI-compatible chat-completions and embeddings API.
pub struct HttpModel {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    embedding_model: String,
    api_key: Option<String>,
    attempts: u32,
    backoff: Duration,
}

enum Failure {
    Retry(String),
    Fatal(String),
}

impl HttpModel {
    /// Reads the API key from the configured environment variable; a missing
    /// key is allowed for local endpoints that need none.
    pub fn from_config(config: &ProviderConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_s))
            .build()
            .map_err(|e| PriorError::Provider(format!("http client: {e}")))?;
        Ok(Self {
            client,
            endpoint: config.endpoint.trim_end_matches('/').to_string(),
            model: config.model.clone(),
            embedding_model: config.embedding_model.clone(),
            api_key: std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()),
            attempts: config.attempts.max(1),
            backoff: Duration::from_millis(config.backoff_ms),
        })
    }

    fn post_once(&self, route: &str, body: &Value) -> std::result::Result<Value, Failure> {
        let mut req = self.client.post(format!("{}/{route}", self.endpoint)).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Failure::Retry(format!("request failed: {e}")))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Failure::Retry(format!("reading body: {e}")))?;
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Failure::Retry(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(Failure::Fatal(format!("HTTP {status}: {text}")));
        }
        serde_json::from_str(&text).map_err(|e| Failure::Fatal(format!("malformed response: {e}")))
    }

    /// POST with exponential backoff on transient failures.
    fn post(&self, route: &str, body: &Value) -> Result<Value> {
        let mut last = String::new();
        for attempt in 0..self.attempts {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match self.post_once(route, body) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(msg)) => return Err(PriorError::Provider(msg)),
                Err(Failure::Retry(msg)) => {
                    log::warn!("attempt {} of {} failed: {msg}", attempt + 1, self.attempts);
                    last = msg;
                }
            }
        }
        Err(PriorError::Provider(format!("{} attempts failed, last: {last}", self.attempts)))
    }

    fn chat_body(&self, req: &ChatRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(sys) = &req.system {
            messages.push(json!({"role": "system", "content": sys}));
        }
        messages.push(json!({"role": "user", "content": req.user}));
        let mut body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": 0,
            "max_tokens": req.max_tokens,
        });
        if req.logprobs {
            body["logprobs"] = json!(true);
            body["top_logprobs"] = json!(20);
        }
        body
    }
}

fn malformed(what: &str) -> PriorError {
    PriorError::Provider(format!("response lacks {what}"))
}

impl LanguageModel for HttpModel {
    fn id(&self) -> String {
        self.model.clone()
    }

    fn top_logprobs(&self, req: &ChatRequest, _intent: &Intent) -> Result<Vec<(String, f64)>> {
        let v = self.post("chat/completions", &self.chat_body(req))?;
        let first = &v["choices"][0]["logprobs"]["content"][0];
        let top = first["top_logprobs"].as_array().ok_or_else(|| malformed("top_logprobs"))?;
        let mut out: Vec<(String, f64)> = top
            .iter()
            .filter_map(|t| Some((t["token"].as_str()?.to_string(), t["logprob"].as_f64()?)))
            .collect();
        // the sampled token itself, in case the server omits it from the top list
        if let (Some(tok), Some(lp)) = (first["token"].as_str(), first["logprob"].as_f64()) {
            if !out.iter().any(|(t, _)| t == tok) {
                out.push((tok.to_string(), lp));
            }
        }
        Ok(out)
    }

    fn complete(&self, req: &ChatRequest, _intent: &Intent) -> Result<String> {
        let v = self.post("chat/completions", &self.chat_body(req))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| malformed("message content"))
    }

    fn embed(&self, text: &str, _intent: &Intent) -> Result<Vec<f64>> {
        let body = json!({"model": self.embedding_model, "input": text});
        let v = self.post("embeddings", &body)?;
        let arr = v["data"][0]["embedding"].as_array().ok_or_else(|| malformed("embedding"))?;
        arr.iter()
            .map(|x| x.as_f64().ok_or_else(|| malformed("numeric embedding")))
            .collect()
    }
}
