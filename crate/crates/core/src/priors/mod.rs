//! Language-model priors: MCQA location priors from option logprobs,
//! use-description embeddings and cosine similarity, the co-location
//! toggler, and LGBU belief replacement, behind a provider with live,
//! replay and mock backends.

mod cache;
mod colocation;
mod http;
mod lgbu;
mod mcqa;
mod mock;
mod prompts;
mod provider;

pub use cache::{cache_key, CacheKind, CacheRecord, PriorCache, TokenLogprob};
pub use colocation::{colocation_toggle, cosine, describe_object_uses, embedding_text, similarity, similarity_matrix};
pub use http::HttpModel;
pub use lgbu::{lgbu_update, LgbuObservation};
pub use mcqa::{extract_option_logprobs, generate_prior, logprobs_to_prior, McqaLevel, McqaQuery, PriorRecord, MISSING_LOGPROB};
pub use mock::{feature_hash_embedding, LgbuMockMode, MockModel};
pub use prompts::{
    build_lgbu_prompt, build_mcqa_prompt, describe_prompt, display_name, toggle_prompt, LGBU_SYSTEM_PROMPT,
    TOGGLE_SYSTEM_PROMPT,
};
pub use provider::{ChatRequest, Intent, LanguageModel, Provider, ProviderConfig, ProviderMode};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("provider error: {0}")]
    Provider(String),

    #[error("missing cached {kind} entry {key} for prompt {prompt:?}")]
    MissingPrior { kind: String, key: String, prompt: String },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Belief(#[from] crate::belief::BeliefError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PriorError>;
