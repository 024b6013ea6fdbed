//! Remote provider settings.

use serde::{Deserialize, Serialize};

/// Connection, pricing, and retry settings for an OpenAI-compatible backend.
///
/// The API key is named by environment variable, never stored; an empty
/// `api_key_env` means the endpoint needs no authentication (local servers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    /// Chat model identifier sent in request bodies.
    pub model: String,
    /// Embedding model; falls back to `model` when unset.
    pub embed_model: Option<String>,
    /// Base URL, e.g. "https://api.openai.com/v1".
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub price_per_1k_prompt_tokens: f64,
    pub price_per_1k_completion_tokens: f64,
    /// Per-request timeout.
    pub timeout_secs: u64,
    /// Total attempts per call (first try included).
    pub max_retries: u32,
    /// First backoff delay; doubles after every failed attempt.
    pub backoff_base_secs: f64,
    /// Expected embedding dimension (validated on every embed reply).
    pub embed_dimension: usize,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            model: String::new(),
            embed_model: None,
            endpoint: "https://api.openai.com/v1".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            price_per_1k_prompt_tokens: 0.0,
            price_per_1k_completion_tokens: 0.0,
            timeout_secs: 60,
            max_retries: 5,
            backoff_base_secs: 1.0,
            embed_dimension: 1536,
        }
    }
}

impl ProviderConfig {
    pub fn embed_model(&self) -> &str {
        self.embed_model.as_deref().unwrap_or(&self.model)
    }
}
