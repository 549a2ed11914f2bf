//! Language-model clients.
//!
//! Everything downstream talks to [`LlmClient`]. Three backends exist: a
//! generic HTTP completion endpoint, a deterministic keyword mock for
//! hermetic runs, and a replay table of recorded answers keyed by prompt
//! hash.

mod http;
mod mock;
mod replay;

use std::time::Duration;

pub use http::HttpCompletion;
pub use mock::{KeywordMock, MockRule};
pub use replay::{prompt_sha256, Recorder, Replay, ReplayEntry};

/// Environment variable holding the bearer token for [`HttpCompletion`].
pub const API_KEY_ENV: &str = "POLICY2LABEL_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("server error {status}: {body}")]
    Server { status: u16, body: String },
    #[error("request rejected with status {status}: {body}")]
    Client { status: u16, body: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no recorded answer for prompt {0}")]
    ReplayMiss(String),
    #[error("invalid client configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LlmError {
    /// Transport failures and 5xx responses may succeed on a later try.
    pub fn is_retryable(&self) -> bool {
        matches!(self, LlmError::Transport(_) | LlmError::Server { .. })
    }
}

/// A text-completion model. Implementations must tolerate concurrent calls.
pub trait LlmClient: Send + Sync {
    /// Completes `prompt`, asking for at most roughly `max_answer_words`
    /// words of output.
    fn complete(&self, prompt: &str, max_answer_words: usize) -> Result<String, LlmError>;
}

impl<T: LlmClient + ?Sized> LlmClient for &T {
    fn complete(&self, prompt: &str, max_answer_words: usize) -> Result<String, LlmError> {
        (**self).complete(prompt, max_answer_words)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for Box<T> {
    fn complete(&self, prompt: &str, max_answer_words: usize) -> Result<String, LlmError> {
        (**self).complete(prompt, max_answer_words)
    }
}

/// How often and how patiently to retry a failed completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub retries: u32,
    /// Delay before the first retry; doubles on each further attempt.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            retries: 2,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    pub fn complete(
        &self,
        client: &dyn LlmClient,
        prompt: &str,
        max_answer_words: usize,
    ) -> Result<String, LlmError> {
        let mut attempt = 0;
        loop {
            match client.complete(prompt, max_answer_words) {
                Err(e) if e.is_retryable() && attempt < self.retries => {
                    let delay = self.base_delay.saturating_mul(1 << attempt.min(16));
                    tracing::warn!(attempt, error = %e, "retrying completion");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}
