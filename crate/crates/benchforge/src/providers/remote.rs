//! OpenAI-compatible HTTP adapter: `/chat/completions` for chat and
//! `/embeddings` for vectors, with bounded exponential-backoff retries.

use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::json;

use super::{
    estimate_tokens, price_call, ChatReply, ChatRequest, Meter, Provider, ProviderConfig,
    ProviderError,
};
use crate::types::UsageMeter;

pub struct RemoteProvider {
    cfg: ProviderConfig,
    api_key: Option<String>,
    client: reqwest::Client,
    meter: Meter,
}

impl RemoteProvider {
    /// Build a handle, resolving the API key from the configured environment
    /// variable up front so a missing credential fails before any work runs.
    pub fn new(cfg: ProviderConfig) -> Result<Self, ProviderError> {
        let api_key = if cfg.api_key_env.is_empty() {
            None
        } else {
            match std::env::var(&cfg.api_key_env) {
                Ok(v) if !v.is_empty() => Some(v),
                _ => return Err(ProviderError::MissingCredential(cfg.api_key_env.clone())),
            }
        };
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Transport {
                endpoint: cfg.endpoint.clone(),
                message: e.to_string(),
            })?;
        Ok(Self {
            cfg,
            api_key,
            client,
            meter: Meter::default(),
        })
    }

    /// POST a JSON body with retries; returns the decoded JSON on success.
    async fn post_json(
        &self,
        path: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, ProviderError> {
        let url = format!("{}/{}", self.cfg.endpoint.trim_end_matches('/'), path);
        let attempts = self.cfg.max_retries.max(1);
        let mut last_error = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                tokio::time::sleep(backoff_delay(self.cfg.backoff_base_secs, attempt)).await;
            }
            let mut req = self.client.post(&url).json(body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send().await {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        return response.json::<serde_json::Value>().await.map_err(|e| {
                            ProviderError::MalformedResponse(format!("invalid JSON body: {e}"))
                        });
                    }
                    let body_text = response.text().await.unwrap_or_default();
                    let err = ProviderError::Backend {
                        status: status.as_u16(),
                        body: truncate(&body_text, 300),
                    };
                    if !retryable_status(status.as_u16()) {
                        return Err(err);
                    }
                    last_error = Some(err);
                }
                Err(e) => {
                    if e.is_timeout() {
                        last_error = Some(ProviderError::Timeout {
                            seconds: self.cfg.timeout_secs as f64,
                            attempts: attempt + 1,
                        });
                    } else {
                        last_error = Some(ProviderError::Transport {
                            endpoint: url.clone(),
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
        Err(last_error.expect("at least one attempt ran"))
    }
}

/// Delay before retry number `attempt` (1-based): base * 2^(attempt-1).
pub fn backoff_delay(base_secs: f64, attempt: u32) -> Duration {
    Duration::from_secs_f64(base_secs * 2f64.powi(attempt as i32 - 1))
}

/// Rate limits and server-side failures are worth retrying; other client
/// errors are not.
pub fn retryable_status(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        let mut end = max;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &s[..end])
    }
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: Option<u64>,
    completion_tokens: Option<u64>,
}

#[async_trait]
impl Provider for RemoteProvider {
    async fn chat(&self, request: &ChatRequest) -> Result<ChatReply, ProviderError> {
        let body = json!({
            "model": self.cfg.model,
            "messages": request.messages,
            "temperature": request.temperature,
        });
        let started = Instant::now();
        let value = self.post_json("chat/completions", &body).await?;
        let wall_seconds = started.elapsed().as_secs_f64();

        let text = value
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                ProviderError::MalformedResponse(
                    "response lacks choices[0].message.content".into(),
                )
            })?
            .to_string();

        let reported: Option<WireUsage> = value
            .get("usage")
            .and_then(|u| serde_json::from_value(u.clone()).ok());
        let (prompt_tokens, completion_tokens, estimated) = match reported {
            Some(WireUsage {
                prompt_tokens: Some(p),
                completion_tokens: Some(c),
            }) => (p, c, false),
            _ => {
                let p = request
                    .messages
                    .iter()
                    .map(|m| estimate_tokens(&m.content))
                    .sum();
                (p, estimate_tokens(&text), true)
            }
        };
        let usage = UsageMeter {
            prompt_tokens,
            completion_tokens,
            wall_seconds,
            dollars: price_call(
                prompt_tokens,
                completion_tokens,
                self.cfg.price_per_1k_prompt_tokens,
                self.cfg.price_per_1k_completion_tokens,
            ),
            estimated,
        };
        self.meter.record(&usage);
        Ok(ChatReply { text, usage })
    }

    async fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        if text.is_empty() {
            return Err(ProviderError::EmptyEmbedInput);
        }
        let body = json!({
            "model": self.cfg.embed_model(),
            "input": text,
        });
        let started = Instant::now();
        let value = self.post_json("embeddings", &body).await?;
        let wall_seconds = started.elapsed().as_secs_f64();

        let vector: Vec<f64> = value
            .pointer("/data/0/embedding")
            .and_then(|v| v.as_array())
            .map(|arr| arr.iter().filter_map(|x| x.as_f64()).collect())
            .ok_or_else(|| {
                ProviderError::MalformedResponse("response lacks data[0].embedding".into())
            })?;
        if vector.len() != self.cfg.embed_dimension {
            return Err(ProviderError::MalformedResponse(format!(
                "embedding dimension {} does not match configured {}",
                vector.len(),
                self.cfg.embed_dimension
            )));
        }

        let reported = value
            .pointer("/usage/prompt_tokens")
            .and_then(|v| v.as_u64());
        let (prompt_tokens, estimated) = match reported {
            Some(p) => (p, false),
            None => (estimate_tokens(text), true),
        };
        self.meter.record(&UsageMeter {
            prompt_tokens,
            completion_tokens: 0,
            wall_seconds,
            dollars: price_call(
                prompt_tokens,
                0,
                self.cfg.price_per_1k_prompt_tokens,
                0.0,
            ),
            estimated,
        });
        Ok(vector)
    }

    fn usage(&self) -> UsageMeter {
        self.meter.snapshot()
    }

    fn descriptor(&self) -> String {
        format!("openai:{}", self.cfg.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    #[test]
    fn backoff_doubles_from_base() {
        assert_eq!(backoff_delay(1.0, 1), Duration::from_secs(1));
        assert_eq!(backoff_delay(1.0, 2), Duration::from_secs(2));
        assert_eq!(backoff_delay(1.0, 3), Duration::from_secs(4));
        assert_eq!(backoff_delay(1.0, 4), Duration::from_secs(8));
        assert_eq!(backoff_delay(0.5, 2), Duration::from_secs(1));
    }

    #[test]
    fn retry_classification() {
        assert!(retryable_status(429));
        assert!(retryable_status(500));
        assert!(retryable_status(503));
        assert!(!retryable_status(400));
        assert!(!retryable_status(401));
        assert!(!retryable_status(404));
    }

    #[test]
    fn missing_credential_fails_at_construction() {
        let cfg = ProviderConfig {
            api_key_env: "BENCHFORGE_TEST_KEY_THAT_DOES_NOT_EXIST".into(),
            ..ProviderConfig::default()
        };
        assert!(matches!(
            RemoteProvider::new(cfg),
            Err(ProviderError::MissingCredential(_))
        ));
    }

    /// One-shot HTTP server: answers each accepted connection with the next
    /// canned (status, body) pair, then stops.
    fn serve_responses(responses: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                // Read request until the blank line, plus the content body
                // (ignored; the canned reply does not depend on it).
                let mut buf = [0u8; 65536];
                let mut seen = Vec::new();
                loop {
                    let n = stream.read(&mut buf).unwrap();
                    seen.extend_from_slice(&buf[..n]);
                    if n == 0 || request_complete(&seen) {
                        break;
                    }
                }
                let reason = if status == 200 { "OK" } else { "Error" };
                let reply = format!(
                    "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}"), handle)
    }

    fn request_complete(bytes: &[u8]) -> bool {
        let text = String::from_utf8_lossy(bytes);
        if let Some(header_end) = text.find("\r\n\r\n") {
            let content_length = text
                .lines()
                .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().ok()))
                .flatten()
                .unwrap_or(0);
            return bytes.len() >= header_end + 4 + content_length;
        }
        false
    }

    fn test_cfg(endpoint: String) -> ProviderConfig {
        ProviderConfig {
            model: "test-model".into(),
            endpoint,
            api_key_env: String::new(),
            price_per_1k_prompt_tokens: 1.0,
            price_per_1k_completion_tokens: 2.0,
            timeout_secs: 5,
            max_retries: 3,
            backoff_base_secs: 0.01,
            embed_dimension: 3,
            ..ProviderConfig::default()
        }
    }

    #[tokio::test]
    async fn chat_parses_content_and_reported_usage() {
        let body = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "The answer is B."}}],
            "usage": {"prompt_tokens": 100, "completion_tokens": 50}
        })
        .to_string();
        let (endpoint, server) = serve_responses(vec![(200, body)]);
        let provider = RemoteProvider::new(test_cfg(endpoint)).unwrap();
        let reply = provider.chat(&ChatRequest::user("hello")).await.unwrap();
        server.join().unwrap();
        assert_eq!(reply.text, "The answer is B.");
        assert_eq!(reply.usage.prompt_tokens, 100);
        assert_eq!(reply.usage.completion_tokens, 50);
        assert!(!reply.usage.estimated);
        // 100/1000 * $1 + 50/1000 * $2 = $0.2
        assert!((reply.usage.dollars - 0.2).abs() < 1e-12);
        assert!(provider.usage().prompt_tokens == 100);
    }

    #[tokio::test]
    async fn chat_without_reported_usage_estimates_and_flags() {
        let body = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "one two three four"}}]
        })
        .to_string();
        let (endpoint, server) = serve_responses(vec![(200, body)]);
        let provider = RemoteProvider::new(test_cfg(endpoint)).unwrap();
        let reply = provider.chat(&ChatRequest::user("hi there friend")).await.unwrap();
        server.join().unwrap();
        assert!(reply.usage.estimated);
        assert_eq!(reply.usage.prompt_tokens, 4); // 3 words * 1.3 -> 3.9 -> 4
        assert_eq!(reply.usage.completion_tokens, 5); // 4 words * 1.3 -> 5.2 -> 5
    }

    #[tokio::test]
    async fn server_errors_are_retried_until_success() {
        let ok = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "recovered"}}],
            "usage": {"prompt_tokens": 1, "completion_tokens": 1}
        })
        .to_string();
        let (endpoint, server) = serve_responses(vec![
            (500, "{\"error\":\"boom\"}".into()),
            (429, "{\"error\":\"slow down\"}".into()),
            (200, ok),
        ]);
        let provider = RemoteProvider::new(test_cfg(endpoint)).unwrap();
        let reply = provider.chat(&ChatRequest::user("try")).await.unwrap();
        server.join().unwrap();
        assert_eq!(reply.text, "recovered");
        // Usage reflects only the successful attempt.
        assert_eq!(provider.usage().prompt_tokens, 1);
    }

    #[tokio::test]
    async fn client_errors_fail_fast() {
        let (endpoint, server) = serve_responses(vec![(401, "{\"error\":\"no auth\"}".into())]);
        let provider = RemoteProvider::new(test_cfg(endpoint)).unwrap();
        let err = provider.chat(&ChatRequest::user("x")).await.unwrap_err();
        server.join().unwrap();
        match err {
            ProviderError::Backend { status, .. } => assert_eq!(status, 401),
            other => panic!("expected backend error, got {other:?}"),
        }
    }

    #[tokio::test]
    async fn embeddings_validate_dimension() {
        let good = serde_json::json!({
            "data": [{"embedding": [0.1, 0.2, 0.3]}],
            "usage": {"prompt_tokens": 7}
        })
        .to_string();
        let bad = serde_json::json!({
            "data": [{"embedding": [0.1, 0.2]}]
        })
        .to_string();
        let (endpoint, server) = serve_responses(vec![(200, good), (200, bad)]);
        let provider = RemoteProvider::new(test_cfg(endpoint)).unwrap();
        let v = provider.embed("some text").await.unwrap();
        assert_eq!(v, vec![0.1, 0.2, 0.3]);
        assert_eq!(provider.usage().prompt_tokens, 7);
        let err = provider.embed("more text").await.unwrap_err();
        server.join().unwrap();
        assert!(matches!(err, ProviderError::MalformedResponse(_)), "{err:?}");
    }
}
