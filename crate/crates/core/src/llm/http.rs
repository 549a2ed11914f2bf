use std::time::Duration;

use reqwest::header::AUTHORIZATION;
use serde::Deserialize;
use serde_json::json;

use super::{LlmClient, LlmError, API_KEY_ENV};

/// A completion endpoint speaking the common
/// `{"model", "prompt", "max_tokens", "temperature"}` request shape and
/// answering `{"choices": [{"text": ...}]}`.
#[derive(Debug, Clone)]
pub struct HttpCompletion {
    endpoint: url::Url,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

impl HttpCompletion {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(
        endpoint: &str,
        model: impl Into<String>,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Result<Self, LlmError> {
        let endpoint = url::Url::parse(endpoint)
            .map_err(|e| LlmError::Config(format!("endpoint {endpoint:?}: {e}")))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(Self {
            endpoint,
            model: model.into(),
            api_key,
            client,
        })
    }

    /// Reads the bearer token from the environment, if set.
    pub fn from_env(endpoint: &str, model: impl Into<String>) -> Result<Self, LlmError> {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::new(endpoint, model, key, Self::DEFAULT_TIMEOUT)
    }
}

/// Rough English tokens per word, used to size `max_tokens`.
fn tokens_for_words(words: usize) -> usize {
    (words * 4).div_ceil(3).max(1)
}

impl LlmClient for HttpCompletion {
    fn complete(&self, prompt: &str, max_answer_words: usize) -> Result<String, LlmError> {
        let body = json!({
            "model": self.model,
            "prompt": prompt,
            "max_tokens": tokens_for_words(max_answer_words),
            "temperature": 0,
        });
        let mut req = self.client.post(self.endpoint.clone()).json(&body);
        if let Some(key) = &self.api_key {
            req = req.header(AUTHORIZATION, format!("Bearer {key}"));
        }
        let resp = req.send().map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| LlmError::Transport(e.to_string()))?;
        if status.is_server_error() {
            return Err(LlmError::Server { status: status.as_u16(), body: text });
        }
        if !status.is_success() {
            return Err(LlmError::Client { status: status.as_u16(), body: text });
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| LlmError::MalformedResponse("no choices".into()))
    }
}
