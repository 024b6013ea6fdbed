//! Deterministic scripted provider for tests and offline pipelines.
//!
//! Chat pops the next scripted response in call order; embeddings are
//! unit-norm vectors derived by hashing (seed, text), so equal inputs give
//! bit-identical vectors on every platform. Wall time is reported as zero to
//! keep persisted usage snapshots reproducible.

use std::collections::VecDeque;
use std::sync::Mutex;

use async_trait::async_trait;
use sha2::{Digest, Sha256};

use super::{estimate_tokens, price_call, ChatReply, ChatRequest, Meter, Provider, ProviderError};
use crate::types::UsageMeter;

pub struct MockProvider {
    script: Mutex<ScriptState>,
    meter: Meter,
    embed_dimension: usize,
    seed: u64,
    price_per_1k_prompt: f64,
    price_per_1k_completion: f64,
}

struct ScriptState {
    queue: VecDeque<String>,
    consumed: usize,
    prompts: Vec<String>,
}

impl MockProvider {
    /// Provider that answers chats with `responses` in order.
    pub fn new(responses: Vec<String>, embed_dimension: usize) -> Self {
        Self {
            script: Mutex::new(ScriptState {
                queue: responses.into(),
                consumed: 0,
                prompts: Vec::new(),
            }),
            meter: Meter::default(),
            embed_dimension,
            seed: 0,
            price_per_1k_prompt: 0.0,
            price_per_1k_completion: 0.0,
        }
    }

    /// Seed mixed into every embedding hash.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Nonzero prices make the mock exercise dollar accounting.
    pub fn with_prices(mut self, per_1k_prompt: f64, per_1k_completion: f64) -> Self {
        self.price_per_1k_prompt = per_1k_prompt;
        self.price_per_1k_completion = per_1k_completion;
        self
    }

    /// How many scripted responses have been served.
    pub fn consumed(&self) -> usize {
        self.script.lock().expect("script lock").consumed
    }

    /// Message texts of every chat served so far, in service order, with the
    /// messages of one request joined by blank lines.
    pub fn prompts(&self) -> Vec<String> {
        self.script.lock().expect("script lock").prompts.clone()
    }

    fn embedding_for(&self, text: &str) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.embed_dimension);
        let mut i = 0u64;
        while values.len() < self.embed_dimension {
            let mut hasher = Sha256::new();
            hasher.update(self.seed.to_le_bytes());
            hasher.update(text.as_bytes());
            hasher.update(i.to_le_bytes());
            let digest = hasher.finalize();
            for chunk in digest.chunks_exact(8) {
                if values.len() == self.embed_dimension {
                    break;
                }
                let word = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                // Top 53 bits -> [0, 1) exactly representable, then center.
                let unit = (word >> 11) as f64 / (1u64 << 53) as f64;
                values.push(2.0 * unit - 1.0);
            }
            i += 1;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        } else {
            values[0] = 1.0;
        }
        values
    }
}

#[async_trait]
impl Provider for MockProvider {
    async fn chat(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError> {
        let text = {
            let mut state = self.script.lock().expect("script lock");
            match state.queue.pop_front() {
                Some(response) => {
                    state.consumed += 1;
                    let rendered = request
                        .messages
                        .iter()
                        .map(|m| m.content.as_str())
                        .collect::<Vec<_>>()
                        .join("\n\n");
                    state.prompts.push(rendered);
                    response
                }
                None => {
                    return Err(ProviderError::ScriptExhausted {
                        consumed: state.consumed,
                    })
                }
            }
        };
        let prompt_tokens: u64 = request
            .messages
            .iter()
            .map(|m| estimate_tokens(&m.content))
            .sum();
        let completion_tokens = estimate_tokens(&text);
        let usage = UsageMeter {
            prompt_tokens,
            completion_tokens,
            wall_seconds: 0.0,
            dollars: price_call(
                prompt_tokens,
                completion_tokens,
                self.price_per_1k_prompt,
                self.price_per_1k_completion,
            ),
            estimated: true,
        };
        self.meter.record(&usage);
        Ok(ChatReply { text, usage })
    }

    async fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        if text.is_empty() {
            return Err(ProviderError::EmptyEmbedInput);
        }
        let prompt_tokens = estimate_tokens(text);
        let usage = UsageMeter {
            prompt_tokens,
            completion_tokens: 0,
            wall_seconds: 0.0,
            dollars: price_call(prompt_tokens, 0, self.price_per_1k_prompt, 0.0),
            estimated: true,
        };
        self.meter.record(&usage);
        Ok(self.embedding_for(text))
    }

    fn usage(&self) -> UsageMeter {
        self.meter.snapshot()
    }

    fn descriptor(&self) -> String {
        "mock:scripted".to_string()
    }
}
