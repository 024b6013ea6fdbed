//! Chat and embedding backends behind one trait.
//!
//! Two implementations ship: a deterministic scripted [`mock::MockProvider`]
//! for tests and offline runs, and an OpenAI-compatible HTTP adapter in
//! [`remote`]. Every call is metered (tokens, wall time, dollars); handles
//! are shareable across concurrent in-flight requests.

pub mod config;
pub mod mock;
pub mod remote;

use std::sync::Mutex;

use async_trait::async_trait;

use crate::types::UsageMeter;

pub use config::ProviderConfig;
pub use mock::MockProvider;
pub use remote::RemoteProvider;

/// Chat message role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// One chat completion request.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
}

impl ChatRequest {
    /// Single user message at the default sampling temperature of 1.
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            messages: vec![Message {
                role: Role::User,
                content: content.into(),
            }],
            temperature: 1.0,
        }
    }

    pub fn with_system(mut self, content: impl Into<String>) -> Self {
        self.messages.insert(
            0,
            Message {
                role: Role::System,
                content: content.into(),
            },
        );
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }
}

/// A completion plus the usage it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatReply {
    pub text: String,
    /// Delta for this call only; totals accumulate on the provider handle.
    pub usage: UsageMeter,
}

/// Provider failure modes.
#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("mock script exhausted after {consumed} responses")]
    ScriptExhausted { consumed: usize },
    #[error("credential environment variable `{0}` is not set")]
    MissingCredential(String),
    #[error("backend returned status {status}: {body}")]
    Backend { status: u16, body: String },
    #[error("transport failure talking to `{endpoint}`: {message}")]
    Transport { endpoint: String, message: String },
    #[error("request timed out after {attempts} attempt(s) of {seconds}s each")]
    Timeout { seconds: f64, attempts: u32 },
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("embedding input is empty")]
    EmptyEmbedInput,
}

/// A chat + embedding backend with an attached usage meter.
#[async_trait]
pub trait Provider: Send + Sync {
    /// Complete a chat request, returning the text and this call's usage.
    async fn chat(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError>;

    /// Embed a text into a fixed-dimension vector.
    async fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;

    /// Snapshot of all usage accumulated on this handle.
    fn usage(&self) -> UsageMeter;

    /// Short identity string ("mock:scripted", "openai:<model>") recorded as
    /// the generator id of benchmarks produced through this handle.
    fn descriptor(&self) -> String;
}

/// Whitespace token estimate: word count scaled by 1.3, the fallback when a
/// backend does not report usage.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.split_whitespace().count() as f64 * 1.3).round() as u64
}

/// Thread-safe accumulator shared by provider implementations.
#[derive(Debug, Default)]
pub(crate) struct Meter {
    total: Mutex<UsageMeter>,
}

impl Meter {
    pub fn record(&self, delta: &UsageMeter) {
        self.total.lock().expect("meter lock").add(delta);
    }

    pub fn snapshot(&self) -> UsageMeter {
        *self.total.lock().expect("meter lock")
    }
}

/// Dollar cost of a call under per-1000-token prices.
pub(crate) fn price_call(
    prompt_tokens: u64,
    completion_tokens: u64,
    per_1k_prompt: f64,
    per_1k_completion: f64,
) -> f64 {
    prompt_tokens as f64 / 1000.0 * per_1k_prompt
        + completion_tokens as f64 / 1000.0 * per_1k_completion
}
